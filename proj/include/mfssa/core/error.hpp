#pragma once

#include <stdexcept>
#include <string>

namespace mfssa {

enum class ErrorCode {
  invalid_argument,
  numeric_failure,
  projection_failure,
  schema_violation,
  mismatched_length,
  basis_mismatch,
  overlapping_groups,
  index_out_of_range,
  undefined_correlation,
  common_domain_required,
  plan_mismatch,
  io_error,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the engine carries a machine-readable class so the
// C API and HTTP layer can map it without parsing messages.
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

}  // namespace mfssa
