#include "pd/common/error.hpp"

namespace pd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::validation: return "validation";
    case ErrorCode::state: return "state";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::gate_blocked: return "gate_blocked";
    case ErrorCode::busy: return "busy";
    case ErrorCode::provider: return "provider";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

}  // namespace pd
