#pragma once

#include <stdexcept>
#include <string>

namespace lcn {

// Error categories map onto the CLI exit-code contract:
// User -> 1, Infeasible/Inconsistent -> 2, Capacity -> 3.
enum class ErrorCode { User, Infeasible, Inconsistent, Capacity };

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

  static Error user(const std::string& m) { return Error(ErrorCode::User, m); }
  static Error infeasible(const std::string& m) { return Error(ErrorCode::Infeasible, m); }
  static Error inconsistent(const std::string& m) { return Error(ErrorCode::Inconsistent, m); }
  static Error capacity(const std::string& m) { return Error(ErrorCode::Capacity, m); }

 private:
  ErrorCode code_;
};

}  // namespace lcn
