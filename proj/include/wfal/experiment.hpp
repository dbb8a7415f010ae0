#pragma once

#include <map>
#include <string>
#include <vector>

#include "wfal/active_learning.hpp"
#include "wfal/checkpoint.hpp"

namespace wfal {

struct EvalConfig {
  int runs_per_class = 2;    // simulated eval pool: runs per anomaly class
  int normal_runs = 2;       // plus anomaly-free runs
  double holdout_fraction = 0.2;  // replay backend: share of the pool held out
  std::uint64_t seed = 9001;      // fixed so the eval set matches across seeds
  int histogram_bins = 10;
};

// Everything one command needs, normally parsed from a JSON document (the C
// API surface) that the CLI assembles from its flags.
struct RunConfig {
  std::string command;  // simulate | train | report
  std::string mode = "active";
  std::string model = "gcn";
  std::string backend = "sim";
  std::string preset;
  std::string data_dir;

  std::string workflows_path;
  std::string infrastructure_path;
  std::string experiments_path;
  std::string traces_path;
  std::string out_dir = "out";
  std::string workflow_name;

  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  AlConfig al;
  TrainConfig train;
  std::size_t gcn_hidden = 32;
  int gcn_classes = 5;
  SslConfig ssl;  // input_dim resolved from the schema at run time
  SimOptions sim;
  EvalConfig eval;

  int baseline_pool = 0;   // 0: matched budget K * executions_per_iteration
  int baseline_chunk = 0;  // graphs per baseline update; 0: executions_per_iteration
  int top_k = 1;
  bool force = false;
  bool lax = false;
  std::vector<std::string> report_inputs;

  void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);

// --- simulate ---------------------------------------------------------

std::vector<TraceRecord> run_simulation(const RunConfig& cfg);
void cmd_simulate(const RunConfig& cfg);

// --- train ------------------------------------------------------------

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::vector<MetricsRecord> history;
  std::vector<IterationEvent> events;
};

struct TrainOutcome {
  std::vector<SeedOutcome> per_seed;
  std::vector<MetricsRecord> all_metrics;
};

TrainOutcome run_training(const RunConfig& cfg, bool write_outputs);
void cmd_train(const RunConfig& cfg);

// --- report -----------------------------------------------------------

struct ReportRow {
  std::string mode;
  int iteration = 0;
  int seeds = 0;
  double auc_mean = 0.0, auc_min = 0.0, auc_max = 0.0;
  double ap_mean = 0.0, ap_min = 0.0, ap_max = 0.0;
  double top_k_mean = 0.0, top_k_min = 0.0, top_k_max = 0.0;
};

std::vector<ReportRow> aggregate_metrics(const std::vector<MetricsRecord>& records);
void cmd_report(const RunConfig& cfg);

}  // namespace wfal
