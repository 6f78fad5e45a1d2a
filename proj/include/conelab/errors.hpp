#pragma once

#include <stdexcept>
#include <string>

namespace conelab {

/// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorClass {
  usage,      // violated precondition or malformed input (exit 2)
  numerical,  // non-convergence, overflow, exhausted search (exit 3)
};

/// Every failure raised by the library carries a short machine-readable
/// code (e.g. "mesh-too-coarse") next to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), class_(cls), code_(std::move(code)) {}

  ErrorClass error_class() const noexcept { return class_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorClass class_;
  std::string code_;
};

inline Error usage_error(std::string code, const std::string& what) {
  return Error(ErrorClass::usage, std::move(code), what);
}

inline Error numerical_error(std::string code, const std::string& what) {
  return Error(ErrorClass::numerical, std::move(code), what);
}

inline void require(bool cond, const char* code, const std::string& what) {
  if (!cond) throw usage_error(code, what);
}

}  // namespace conelab
