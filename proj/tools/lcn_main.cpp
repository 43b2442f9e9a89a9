#include <iostream>
#include <string>
#include <vector>

#include "lcn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lcn::cli::run(args, std::cout, std::cerr);
}
