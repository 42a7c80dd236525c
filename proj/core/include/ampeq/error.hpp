#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ampeq {

enum class ErrorCode {
  Dimension,
  BlowUp,
  SingularOperator,
  Domain,
  InvalidModel,
  NotPsd,
  Integration,
  Alignment,
  Precondition,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` tells callers (the CLI in
/// particular) which class of failure occurred.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ampeq
