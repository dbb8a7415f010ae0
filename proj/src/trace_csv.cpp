#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wfal/error.hpp"
#include "wfal/trace.hpp"

namespace wfal {

namespace {

const std::vector<std::string> kColumns = {
    "workflow",   "run_id",     "job_id",        "job_type",
    "ready_ts",   "submit_ts",  "start_ts",      "end_ts",
    "runtime_s",  "cpu_time_s", "bytes_read",    "bytes_written",
    "stage_in_s", "stage_out_s", "anomaly_label", "anomaly_magnitude"};

// 17 significant digits round-trips any double exactly.
std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double parse_real(const std::string& text, std::size_t line, const std::string& column) {
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    raise(ErrorCode::parse_error, "line " + std::to_string(line) + ", column '" + column +
                                      "': not a real number: '" + text + "'");
  }
  return value;
}

std::uint64_t parse_count(const std::string& text, std::size_t line, const std::string& column) {
  std::uint64_t value = 0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    raise(ErrorCode::parse_error, "line " + std::to_string(line) + ", column '" + column +
                                      "': not a count: '" + text + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

const std::vector<std::string>& trace_columns() { return kColumns; }

void validate_record(const TraceRecord& record) {
  auto fail = [&](const std::string& what) {
    raise(ErrorCode::invariant_violation,
          "run " + record.run_id + " job " + record.job_id + ": " + what);
  };
  if (!(record.ready_ts <= record.submit_ts)) fail("ready_ts > submit_ts");
  if (!(record.submit_ts <= record.start_ts)) fail("submit_ts > start_ts");
  if (!(record.start_ts <= record.end_ts)) fail("start_ts > end_ts");
  if (std::abs(record.runtime_s - (record.end_ts - record.start_ts)) > 1e-6) {
    fail("runtime_s does not equal end_ts - start_ts");
  }
  if (record.runtime_s < 0.0 || record.cpu_time_s < 0.0 || record.stage_in_s < 0.0 ||
      record.stage_out_s < 0.0) {
    fail("negative duration");
  }
  if (record.anomaly.is_normal()) {
    if (record.anomaly.magnitude != 0.0) fail("normal row with nonzero magnitude");
  } else if (!(record.anomaly.magnitude > 0.0 && record.anomaly.magnitude <= 1.0)) {
    fail("anomaly magnitude outside (0,1]");
  }
}

void write_traces_csv(std::ostream& out, const std::vector<TraceRecord>& records) {
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    if (i != 0) out << ',';
    out << kColumns[i];
  }
  out << '\n';
  for (const auto& r : records) {
    validate_record(r);
    out << r.workflow << ',' << r.run_id << ',' << r.job_id << ',' << r.job_type << ','
        << format_real(r.ready_ts) << ',' << format_real(r.submit_ts) << ','
        << format_real(r.start_ts) << ',' << format_real(r.end_ts) << ','
        << format_real(r.runtime_s) << ',' << format_real(r.cpu_time_s) << ','
        << r.bytes_read << ',' << r.bytes_written << ',' << format_real(r.stage_in_s) << ','
        << format_real(r.stage_out_s) << ',' << to_string(r.anomaly.type) << ','
        << format_real(r.anomaly.magnitude) << '\n';
  }
}

void write_traces_csv(const std::string& path, const std::vector<TraceRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  write_traces_csv(out, records);
  if (!out) raise(ErrorCode::io_error, "failed writing '" + path + "'");
}

std::vector<TraceRecord> parse_traces_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) raise(ErrorCode::parse_error, "empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() != kColumns.size()) {
    raise(ErrorCode::parse_error, "header has " + std::to_string(header.size()) +
                                      " columns, expected " + std::to_string(kColumns.size()));
  }
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    if (header[i] != kColumns[i]) {
      raise(ErrorCode::parse_error,
            "header column " + std::to_string(i + 1) + " is '" + header[i] + "', expected '" +
                kColumns[i] + "'");
    }
  }

  std::vector<TraceRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != kColumns.size()) {
      raise(ErrorCode::parse_error, "line " + std::to_string(line_no) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(kColumns.size()));
    }
    TraceRecord r;
    r.workflow = cells[0];
    r.run_id = cells[1];
    r.job_id = cells[2];
    r.job_type = cells[3];
    r.ready_ts = parse_real(cells[4], line_no, "ready_ts");
    r.submit_ts = parse_real(cells[5], line_no, "submit_ts");
    r.start_ts = parse_real(cells[6], line_no, "start_ts");
    r.end_ts = parse_real(cells[7], line_no, "end_ts");
    r.runtime_s = parse_real(cells[8], line_no, "runtime_s");
    r.cpu_time_s = parse_real(cells[9], line_no, "cpu_time_s");
    r.bytes_read = parse_count(cells[10], line_no, "bytes_read");
    r.bytes_written = parse_count(cells[11], line_no, "bytes_written");
    r.stage_in_s = parse_real(cells[12], line_no, "stage_in_s");
    r.stage_out_s = parse_real(cells[13], line_no, "stage_out_s");
    AnomalyType type;
    try {
      type = anomaly_type_from_string(cells[14]);
    } catch (const Error&) {
      raise(ErrorCode::parse_error,
            "line " + std::to_string(line_no) + ": unknown anomaly_label '" + cells[14] + "'");
    }
    const double magnitude = parse_real(cells[15], line_no, "anomaly_magnitude");
    r.anomaly.type = type;
    r.anomaly.magnitude = magnitude;
    try {
      validate_record(r);
    } catch (const Error& e) {
      raise(ErrorCode::invariant_violation, "line " + std::to_string(line_no) + ": " + e.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<TraceRecord> parse_traces_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot open trace file '" + path + "'");
  return parse_traces_csv(in);
}

}  // namespace wfal
