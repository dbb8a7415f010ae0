#include "wfal/error.hpp"

namespace wfal {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::schema_violation: return "SchemaViolation";
    case ErrorCode::unresolved_reference: return "UnresolvedReference";
    case ErrorCode::config_invalid: return "ConfigInvalid";
    case ErrorCode::missing_column: return "MissingColumn";
    case ErrorCode::non_numeric_value: return "NonNumericValue";
    case ErrorCode::cycle_detected: return "CycleDetected";
    case ErrorCode::index_out_of_range: return "IndexOutOfRange";
    case ErrorCode::feature_dim_mismatch: return "FeatureDimMismatch";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::dim_mismatch: return "DimMismatch";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::label_out_of_range: return "LabelOutOfRange";
    case ErrorCode::k_out_of_range: return "KOutOfRange";
    case ErrorCode::non_positive_temperature: return "NonPositiveTemperature";
    case ErrorCode::trace_mismatch: return "TraceMismatch";
    case ErrorCode::degenerate_labels: return "DegenerateLabels";
    case ErrorCode::no_positives: return "NoPositives";
    case ErrorCode::out_of_range_value: return "OutOfRangeValue";
    case ErrorCode::empty_report: return "EmptyReport";
    case ErrorCode::magnitude_out_of_range: return "MagnitudeOutOfRange";
    case ErrorCode::unknown_workflow: return "UnknownWorkflow";
    case ErrorCode::unknown_job_hint: return "UnknownJobHint";
    case ErrorCode::invariant_violation: return "InvariantViolation";
    case ErrorCode::backend_failure: return "BackendFailure";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::pool_exhausted: return "PoolExhausted";
  }
  return "UnknownError";
}

int exit_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error:
    case ErrorCode::schema_violation:
    case ErrorCode::unresolved_reference:
    case ErrorCode::config_invalid:
    case ErrorCode::missing_column:
      return 2;
    case ErrorCode::pool_exhausted:
      return 4;
    default:
      return 3;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace wfal
