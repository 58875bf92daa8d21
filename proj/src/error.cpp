#include "raden/error.hpp"

namespace raden {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::validation: return "validation";
    case ErrorCode::degenerate_spec: return "degenerate_spec";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::degenerate_input: return "degenerate_input";
    case ErrorCode::degenerate_estimate: return "degenerate_estimate";
    case ErrorCode::invalid_gcv: return "invalid_gcv";
    case ErrorCode::insufficient_neighborhood: return "insufficient_neighborhood";
    case ErrorCode::degenerate_patch: return "degenerate_patch";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::division_by_zero: return "division_by_zero";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace raden
