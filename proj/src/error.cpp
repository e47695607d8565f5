#include "mfssa/core/error.hpp"

namespace mfssa {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::numeric_failure: return "numeric_failure";
    case ErrorCode::projection_failure: return "projection_failure";
    case ErrorCode::schema_violation: return "schema_violation";
    case ErrorCode::mismatched_length: return "mismatched_length";
    case ErrorCode::basis_mismatch: return "basis_mismatch";
    case ErrorCode::overlapping_groups: return "overlapping_groups";
    case ErrorCode::index_out_of_range: return "index_out_of_range";
    case ErrorCode::undefined_correlation: return "undefined_correlation";
    case ErrorCode::common_domain_required: return "common_domain_required";
    case ErrorCode::plan_mismatch: return "plan_mismatch";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

}  // namespace mfssa
