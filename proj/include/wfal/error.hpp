#pragma once

#include <stdexcept>
#include <string>

namespace wfal {

// Every failure the library reports, including the validation errors that the
// file loaders and numeric kernels raise. Each code belongs to one of three
// process-level categories (see exit_category): config (2), runtime (3),
// data exhaustion (4).
enum class ErrorCode {
  // configuration / input validation
  parse_error,
  schema_violation,
  unresolved_reference,
  config_invalid,
  missing_column,
  non_numeric_value,
  // graph validation
  cycle_detected,
  index_out_of_range,
  feature_dim_mismatch,
  empty_input,
  // numerics / models
  dim_mismatch,
  shape_mismatch,
  label_out_of_range,
  k_out_of_range,
  non_positive_temperature,
  trace_mismatch,
  // metrics
  degenerate_labels,
  no_positives,
  out_of_range_value,
  empty_report,
  // backend
  magnitude_out_of_range,
  unknown_workflow,
  unknown_job_hint,
  invariant_violation,
  backend_failure,
  io_error,
  // replay / baseline pools
  pool_exhausted,
};

const char* to_string(ErrorCode code);

// Process exit code bucket: 2 config, 3 runtime, 4 exhaustion.
int exit_category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace wfal
