#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lcn::cli {

// Entry point shared by the binary and the tests. Exit codes: 0 success,
// 1 user error, 2 infeasible/inconsistent model, 3 capacity error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lcn::cli
