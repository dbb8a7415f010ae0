#include "wfal/featurize.hpp"

#include <cmath>
#include <set>

#include "wfal/error.hpp"

namespace wfal {

namespace {

// Numeric view over a trace record. Unknown names -> MissingColumn; known
// but non-numeric fields -> NonNumericValue.
double numeric_field(const TraceRecord& r, const std::string& name) {
  if (name == "runtime_s") return r.runtime_s;
  if (name == "cpu_time_s") return r.cpu_time_s;
  if (name == "bytes_read") return static_cast<double>(r.bytes_read);
  if (name == "bytes_written") return static_cast<double>(r.bytes_written);
  if (name == "stage_in_s") return r.stage_in_s;
  if (name == "stage_out_s") return r.stage_out_s;
  if (name == "ready_ts") return r.ready_ts;
  if (name == "submit_ts") return r.submit_ts;
  if (name == "start_ts") return r.start_ts;
  if (name == "end_ts") return r.end_ts;
  if (name == "workflow" || name == "run_id" || name == "job_id" || name == "job_type" ||
      name == "anomaly_label") {
    raise(ErrorCode::non_numeric_value, "column '" + name + "' is not numeric");
  }
  raise(ErrorCode::missing_column, "no trace column named '" + name + "'");
}

}  // namespace

std::vector<std::string> FeatureSchema::default_numeric_columns() {
  return {"runtime_s", "cpu_time_s", "bytes_read", "bytes_written", "stage_in_s", "stage_out_s"};
}

FeatureSchema FeatureSchema::with_defaults(std::vector<std::string> job_types) {
  FeatureSchema schema;
  schema.numeric_columns = default_numeric_columns();
  schema.job_types = std::move(job_types);
  return schema;
}

FeatureStats fit_feature_stats(const std::vector<TraceRecord>& records,
                               const FeatureSchema& schema) {
  if (records.empty()) raise(ErrorCode::empty_input, "cannot fit feature stats on no records");
  FeatureStats stats;
  stats.mean.resize(schema.numeric_columns.size(), 0.0);
  stats.stddev.resize(schema.numeric_columns.size(), 0.0);
  const double n = static_cast<double>(records.size());
  for (std::size_t c = 0; c < schema.numeric_columns.size(); ++c) {
    double sum = 0.0;
    for (const auto& r : records) sum += numeric_field(r, schema.numeric_columns[c]);
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& r : records) {
      const double d = numeric_field(r, schema.numeric_columns[c]) - mean;
      sq += d * d;
    }
    stats.mean[c] = mean;
    stats.stddev[c] = std::sqrt(sq / n);
  }
  return stats;
}

FeaturizeResult featurize(const std::vector<TraceRecord>& records, const JobTopology& topology,
                          const FeatureSchema& schema,
                          const std::optional<FeatureStats>& stats) {
  if (records.empty()) raise(ErrorCode::empty_input, "featurize: no records");
  const std::string& workflow = records.front().workflow;
  const std::string& run_id = records.front().run_id;
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.workflow != workflow || r.run_id != run_id) {
      raise(ErrorCode::invariant_violation,
            "featurize: records mix runs (" + run_id + " vs " + r.run_id + ")");
    }
    if (!index_of.emplace(r.job_id, i).second) {
      raise(ErrorCode::invariant_violation,
            "featurize: duplicate job '" + r.job_id + "' in run " + run_id);
    }
  }

  FeatureStats used = stats ? *stats : fit_feature_stats(records, schema);
  if (used.mean.size() != schema.numeric_columns.size() ||
      used.stddev.size() != schema.numeric_columns.size()) {
    raise(ErrorCode::feature_dim_mismatch, "feature stats do not match schema width");
  }

  std::map<std::string, std::size_t> type_index;
  for (std::size_t t = 0; t < schema.job_types.size(); ++t) type_index[schema.job_types[t]] = t;

  WorkflowGraph graph;
  graph.workflow_name = workflow;
  graph.run_id = run_id;
  graph.n_nodes = records.size();
  graph.features = DenseMatrix(records.size(), schema.dimension());
  graph.labels.emplace();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    graph.node_ids.push_back(r.job_id);
    for (std::size_t c = 0; c < schema.numeric_columns.size(); ++c) {
      const double raw = numeric_field(r, schema.numeric_columns[c]);
      graph.features(i, c) =
          used.stddev[c] > 0.0 ? (raw - used.mean[c]) / used.stddev[c] : 0.0;
    }
    if (!schema.job_types.empty()) {
      const auto it = type_index.find(r.job_type);
      if (it == type_index.end()) {
        raise(ErrorCode::schema_violation,
              "job type '" + r.job_type + "' not in the feature schema");
      }
      graph.features(i, schema.numeric_columns.size() + it->second) = 1.0;
    }
    graph.labels->push_back(r.anomaly);
  }

  // Edges from the workflow's parent lists, restricted to jobs present here.
  for (const auto& [job, index] : index_of) {
    const auto topo_it = topology.parents.find(job);
    if (topo_it == topology.parents.end()) {
      raise(ErrorCode::unresolved_reference,
            "job '" + job + "' is not part of the workflow description");
    }
    for (const auto& parent : topo_it->second) {
      const auto parent_it = index_of.find(parent);
      if (parent_it == index_of.end()) {
        raise(ErrorCode::unresolved_reference,
              "parent '" + parent + "' of job '" + job + "' missing from run " + run_id);
      }
      graph.edges.emplace_back(parent_it->second, index);
    }
  }
  validate_dag(graph);
  return {std::move(graph), std::move(used)};
}

std::vector<std::vector<TraceRecord>> split_runs(const std::vector<TraceRecord>& records) {
  std::vector<std::vector<TraceRecord>> runs;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.workflow, r.run_id);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, runs.size());
      runs.emplace_back();
      runs.back().push_back(r);
    } else {
      runs[it->second].push_back(r);
    }
  }
  return runs;
}

}  // namespace wfal
