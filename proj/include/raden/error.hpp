#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace raden {

enum class ErrorCode {
  validation,
  degenerate_spec,
  capacity,
  degenerate_input,
  degenerate_estimate,
  invalid_gcv,
  insufficient_neighborhood,
  degenerate_patch,
  unsupported,
  division_by_zero,
  io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code so the
/// CLI can emit a structured error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::validation, message);
}

}  // namespace raden
