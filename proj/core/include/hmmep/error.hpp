#pragma once

#include <stdexcept>
#include <string>

namespace hmmep {

/// Failure category. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  Usage = 1,
  Data = 2,
  Numerical = 3,
  Budget = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_data_error(const std::string& what) {
  throw Error(ErrorKind::Data, what);
}

[[noreturn]] inline void throw_numerical_error(const std::string& what) {
  throw Error(ErrorKind::Numerical, what);
}

[[noreturn]] inline void throw_budget_error(const std::string& what) {
  throw Error(ErrorKind::Budget, what);
}

}  // namespace hmmep
