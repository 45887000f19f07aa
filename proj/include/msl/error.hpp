#pragma once

#include <stdexcept>
#include <string>

namespace msl {

/// Failure classes. The numeric values are the CLI exit codes.
enum class ErrorKind : int {
  validation = 2,
  budget = 3,
  io = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string& what) {
  throw Error(ErrorKind::validation, what);
}
[[noreturn]] inline void fail_budget(const std::string& what) {
  throw Error(ErrorKind::budget, what);
}
[[noreturn]] inline void fail_io(const std::string& what) {
  throw Error(ErrorKind::io, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail_validation(what);
}

}  // namespace msl
