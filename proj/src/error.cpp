#include "sumrecom/error.hpp"

namespace sumrecom {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kPrecondition: return "precondition_failed";
    case ErrorCode::kExhausted: return "exhausted";
  }
  return "unknown";
}

}  // namespace sumrecom
