#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sumrecom {

enum class ErrorCode {
  kValidation,
  kIo,
  kInfeasible,
  kNotFound,
  kConflict,
  kPrecondition,
  kExhausted,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as Error; `code()` is the machine-readable part
// the service maps onto HTTP status codes.
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

}  // namespace sumrecom
