#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wfal/graph.hpp"

namespace wfal {

// One aggregated statistics row for one job of one run. This is the unit the
// simulated controller emits and the unit the CSV files store.
struct TraceRecord {
  std::string workflow;
  std::string run_id;
  std::string job_id;
  std::string job_type;
  double ready_ts = 0.0;
  double submit_ts = 0.0;
  double start_ts = 0.0;
  double end_ts = 0.0;
  double runtime_s = 0.0;
  double cpu_time_s = 0.0;
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;
  double stage_in_s = 0.0;
  double stage_out_s = 0.0;
  AnomalyClass anomaly;
};

// ready <= submit <= start <= end, runtime == end - start (1e-6), magnitude
// bounds. Throws InvariantViolation naming the offending field.
void validate_record(const TraceRecord& record);

// Column names, in file order. The trace CSV header is exactly this list.
const std::vector<std::string>& trace_columns();

void write_traces_csv(std::ostream& out, const std::vector<TraceRecord>& records);
void write_traces_csv(const std::string& path, const std::vector<TraceRecord>& records);

std::vector<TraceRecord> parse_traces_csv(std::istream& in);
std::vector<TraceRecord> parse_traces_csv_file(const std::string& path);

}  // namespace wfal
