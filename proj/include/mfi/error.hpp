#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfi {

enum class ErrorCode {
  invalid_argument,
  infeasible,
  pool_exhausted,
  off_grid,
  collision,
  parse,
  io,
  validation,
};

std::string_view to_string(ErrorCode code);

/// Domain error carrying a machine-readable code. The CLI prints it as
/// `error: <code>: <message>` on a single line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mfi
