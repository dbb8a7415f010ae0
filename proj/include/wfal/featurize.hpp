#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wfal/graph.hpp"
#include "wfal/trace.hpp"

namespace wfal {

// Parent lists of a workflow, used to rebuild DAG edges from trace rows.
struct JobTopology {
  std::map<std::string, std::vector<std::string>> parents;
};

// Which numeric trace columns become z-scored features and which job types
// become one-hot columns. Feature dimension = numeric + one-hot width.
struct FeatureSchema {
  std::vector<std::string> numeric_columns;
  std::vector<std::string> job_types;

  static std::vector<std::string> default_numeric_columns();
  static FeatureSchema with_defaults(std::vector<std::string> job_types);
  std::size_t dimension() const { return numeric_columns.size() + job_types.size(); }
};

// Per-column standardization parameters. Columns with zero spread keep
// stddev == 0 and standardize to 0.
struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

// Fit mean/std per schema column over any set of records (typically the
// burn-in batch, after which the stats are frozen for the whole run).
FeatureStats fit_feature_stats(const std::vector<TraceRecord>& records,
                               const FeatureSchema& schema);

struct FeaturizeResult {
  WorkflowGraph graph;
  FeatureStats stats;
};

// Build a labeled graph from the records of one run. All records must share
// (workflow, run_id); edges come from the topology's parent lists. When
// `stats` is absent they are fitted from these records and returned.
FeaturizeResult featurize(const std::vector<TraceRecord>& records, const JobTopology& topology,
                          const FeatureSchema& schema,
                          const std::optional<FeatureStats>& stats = std::nullopt);

// Group a flat record list into runs, keyed by (workflow, run_id), preserving
// first-appearance order.
std::vector<std::vector<TraceRecord>> split_runs(const std::vector<TraceRecord>& records);

}  // namespace wfal
