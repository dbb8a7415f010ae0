#include "wfal/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wfal/error.hpp"
#include "wfal/featurize.hpp"

namespace wfal {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::set<std::string> kTopLevelKeys = {
    "command", "mode",          "model",         "backend",       "preset",
    "data_dir", "paths",        "workflow_name", "seeds",         "al",
    "train",    "gcn",          "ssl",           "sim",           "eval",
    "baseline_pool", "baseline_chunk", "top_k",  "force",         "lax",
    "report_inputs"};

void reject_unknown_keys(const json& object, const std::set<std::string>& allowed,
                         const std::string& path) {
  for (const auto& [key, value] : object.items()) {
    (void)value;
    if (!allowed.contains(key)) {
      raise(ErrorCode::config_invalid, "config " + path + ": unknown field '" + key + "'");
    }
  }
}

template <typename T>
void read_into(const json& object, const char* key, T& value) {
  const auto it = object.find(key);
  if (it == object.end()) return;
  try {
    value = it->get<T>();
  } catch (const json::exception& e) {
    raise(ErrorCode::config_invalid, std::string("config field '") + key + "': " + e.what());
  }
}

// Presets pin the bundled synthetic experiments: data files, the paper's
// iteration/execution/pool shapes, and a learning rate sized so the
// desk-scale run actually moves in ten updates. Explicit config wins.
void apply_preset(json& doc) {
  const auto it = doc.find("preset");
  if (it == doc.end() || !it->is_string() || it->get<std::string>().empty()) return;
  const std::string preset = it->get<std::string>();
  std::string data_dir;
  if (doc.contains("data_dir")) data_dir = doc["data_dir"].get<std::string>();
  if (data_dir.empty()) {
    const char* env = std::getenv("WFAL_DATA_DIR");
    if (env != nullptr) data_dir = env;
  }
  int pool = 0;
  if (preset == "genome") {
    pool = 28;
  } else if (preset == "montage") {
    pool = 100;
  } else if (preset == "sales") {
    pool = 250;
  } else {
    raise(ErrorCode::config_invalid, "unknown preset '" + preset + "'");
  }
  if (data_dir.empty() && (!doc.contains("paths") || !doc["paths"].contains("workflows"))) {
    raise(ErrorCode::config_invalid, "preset '" + preset + "' needs data_dir or explicit paths");
  }
  json& paths = doc["paths"];
  if (!paths.contains("workflows")) paths["workflows"] = data_dir + "/" + preset + ".json";
  if (!paths.contains("infrastructure")) {
    paths["infrastructure"] = data_dir + "/infrastructure.json";
  }
  if (!doc.contains("workflow_name")) doc["workflow_name"] = preset;
  json& al = doc["al"];
  if (!al.contains("iterations")) al["iterations"] = 10;
  if (!al.contains("executions_per_iteration")) al["executions_per_iteration"] = 2;
  if (!doc.contains("baseline_pool")) doc["baseline_pool"] = pool;
  if (!doc.contains("baseline_chunk")) doc["baseline_chunk"] = 1;
  json& train = doc["train"];
  if (!train.contains("learning_rate")) train["learning_rate"] = 0.05;
}

}  // namespace

void RunConfig::validate() const {
  if (command != "simulate" && command != "train" && command != "report") {
    raise(ErrorCode::config_invalid, "command must be simulate, train or report");
  }
  if (mode != "active" && mode != "baseline" && mode != "ablation") {
    raise(ErrorCode::config_invalid, "mode must be active, baseline or ablation");
  }
  if (model != "gcn" && model != "ssl") {
    raise(ErrorCode::config_invalid, "model must be gcn or ssl");
  }
  if (backend != "sim" && backend != "replay") {
    raise(ErrorCode::config_invalid, "backend must be sim or replay");
  }
  if (seeds.empty()) raise(ErrorCode::config_invalid, "seeds must be nonempty");
  if (top_k < 1) raise(ErrorCode::config_invalid, "top_k must be >= 1");
  if (command == "train") {
    al.validate();
    train.validate();
    if (workflows_path.empty()) {
      raise(ErrorCode::config_invalid, "train needs a workflows file");
    }
    if (backend == "sim" && infrastructure_path.empty()) {
      raise(ErrorCode::config_invalid, "sim backend needs an infrastructure file");
    }
    if (backend == "replay" && traces_path.empty()) {
      raise(ErrorCode::config_invalid, "replay backend needs a traces file");
    }
  }
  if (command == "simulate") {
    if (workflows_path.empty() || infrastructure_path.empty() || experiments_path.empty()) {
      raise(ErrorCode::config_invalid,
            "simulate needs workflows, infrastructure and experiments files");
    }
  }
  if (command == "report" && report_inputs.empty()) {
    raise(ErrorCode::config_invalid, "report needs at least one metrics file");
  }
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    raise(ErrorCode::config_invalid, std::string("config: ") + e.what());
  }
  if (!doc.is_object()) raise(ErrorCode::config_invalid, "config must be a JSON object");
  reject_unknown_keys(doc, kTopLevelKeys, "");
  apply_preset(doc);

  RunConfig cfg;
  read_into(doc, "command", cfg.command);
  read_into(doc, "mode", cfg.mode);
  read_into(doc, "model", cfg.model);
  read_into(doc, "backend", cfg.backend);
  read_into(doc, "preset", cfg.preset);
  read_into(doc, "data_dir", cfg.data_dir);
  read_into(doc, "workflow_name", cfg.workflow_name);
  read_into(doc, "seeds", cfg.seeds);
  read_into(doc, "baseline_pool", cfg.baseline_pool);
  read_into(doc, "baseline_chunk", cfg.baseline_chunk);
  read_into(doc, "top_k", cfg.top_k);
  read_into(doc, "force", cfg.force);
  read_into(doc, "lax", cfg.lax);
  read_into(doc, "report_inputs", cfg.report_inputs);

  if (doc.contains("paths")) {
    const json& paths = doc["paths"];
    reject_unknown_keys(paths, {"workflows", "infrastructure", "experiments", "traces", "out"},
                        "paths");
    read_into(paths, "workflows", cfg.workflows_path);
    read_into(paths, "infrastructure", cfg.infrastructure_path);
    read_into(paths, "experiments", cfg.experiments_path);
    read_into(paths, "traces", cfg.traces_path);
    read_into(paths, "out", cfg.out_dir);
  }
  if (doc.contains("al")) {
    const json& al = doc["al"];
    reject_unknown_keys(al,
                        {"iterations", "burn_in", "threshold", "beta", "beta_decay", "lambda",
                         "zeta", "probe_step", "random_period", "executions_per_iteration",
                         "hint_count", "magnitude_grid"},
                        "al");
    read_into(al, "iterations", cfg.al.max_iterations);
    read_into(al, "burn_in", cfg.al.burn_in);
    read_into(al, "threshold", cfg.al.threshold);
    read_into(al, "beta", cfg.al.beta);
    read_into(al, "beta_decay", cfg.al.beta_decay);
    read_into(al, "lambda", cfg.al.lambda);
    read_into(al, "zeta", cfg.al.zeta);
    read_into(al, "probe_step", cfg.al.probe_step);
    read_into(al, "random_period", cfg.al.random_period);
    read_into(al, "executions_per_iteration", cfg.al.executions_per_iteration);
    read_into(al, "hint_count", cfg.al.hint_count);
    read_into(al, "magnitude_grid", cfg.al.magnitude_grid);
  }
  if (doc.contains("train")) {
    const json& train = doc["train"];
    reject_unknown_keys(train, {"learning_rate", "weight_decay", "batch_nodes"}, "train");
    read_into(train, "learning_rate", cfg.train.learning_rate);
    read_into(train, "weight_decay", cfg.train.weight_decay);
    read_into(train, "batch_nodes", cfg.train.batch_nodes);
  }
  if (doc.contains("gcn")) {
    const json& gcn = doc["gcn"];
    reject_unknown_keys(gcn, {"hidden", "classes"}, "gcn");
    read_into(gcn, "hidden", cfg.gcn_hidden);
    read_into(gcn, "classes", cfg.gcn_classes);
  }
  if (doc.contains("ssl")) {
    const json& ssl = doc["ssl"];
    reject_unknown_keys(ssl,
                        {"hidden", "latent", "categories", "temperature", "margin",
                         "mask_fraction", "noise_scale", "score_samples"},
                        "ssl");
    read_into(ssl, "hidden", cfg.ssl.hidden);
    read_into(ssl, "latent", cfg.ssl.latent);
    read_into(ssl, "categories", cfg.ssl.categories);
    read_into(ssl, "temperature", cfg.ssl.temperature);
    read_into(ssl, "margin", cfg.ssl.margin);
    read_into(ssl, "mask_fraction", cfg.ssl.mask_fraction);
    read_into(ssl, "noise_scale", cfg.ssl.noise_scale);
    read_into(ssl, "score_samples", cfg.ssl.score_samples);
  }
  if (doc.contains("sim")) {
    const json& sim = doc["sim"];
    reject_unknown_keys(sim,
                        {"noise_sigma", "anomalous_nodes_only", "stage_bandwidth_bytes_per_s",
                         "read_share"},
                        "sim");
    read_into(sim, "noise_sigma", cfg.sim.noise_sigma);
    read_into(sim, "anomalous_nodes_only", cfg.sim.anomalous_nodes_only);
    read_into(sim, "stage_bandwidth_bytes_per_s", cfg.sim.stage_bandwidth_bytes_per_s);
    read_into(sim, "read_share", cfg.sim.read_share);
  }
  if (doc.contains("eval")) {
    const json& eval = doc["eval"];
    reject_unknown_keys(eval,
                        {"runs_per_class", "normal_runs", "holdout_fraction", "seed",
                         "histogram_bins"},
                        "eval");
    read_into(eval, "runs_per_class", cfg.eval.runs_per_class);
    read_into(eval, "normal_runs", cfg.eval.normal_runs);
    read_into(eval, "holdout_fraction", cfg.eval.holdout_fraction);
    read_into(eval, "seed", cfg.eval.seed);
    read_into(eval, "histogram_bins", cfg.eval.histogram_bins);
  }
  cfg.validate();
  return cfg;
}

namespace {

const WorkflowDesc& pick_workflow(const std::vector<WorkflowDesc>& workflows,
                                  const std::string& name) {
  if (name.empty()) return workflows.front();
  for (const auto& workflow : workflows) {
    if (workflow.name == name) return workflow;
  }
  raise(ErrorCode::unknown_workflow, "no workflow named '" + name + "' in the workflows file");
}

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) raise(ErrorCode::io_error, "cannot create output directory '" + out_dir + "'");
}

void refuse_overwrite(const RunConfig& cfg, const std::string& path) {
  if (!cfg.force && fs::exists(path)) {
    raise(ErrorCode::config_invalid, "output '" + path + "' exists; pass --force to overwrite");
  }
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

}  // namespace

std::vector<TraceRecord> run_simulation(const RunConfig& cfg) {
  const auto infra = load_infrastructure(cfg.infrastructure_path, cfg.lax);
  const auto workflows = load_workflows(cfg.workflows_path, cfg.lax);
  const auto experiments = load_experiments(cfg.experiments_path, cfg.lax);
  const std::uint64_t seed = cfg.seeds.front();

  std::vector<TraceRecord> records;
  std::uint64_t counter = 0;
  for (std::size_t x = 0; x < experiments.experiments.size(); ++x) {
    const auto& spec = experiments.experiments[x];
    const WorkflowDesc& workflow = pick_workflow(workflows, spec.workflow);
    ExperimentRequest request;
    request.workflow_name = workflow.name;
    request.executions = spec.executions;
    request.anomaly = spec.anomaly;
    request.job_hints = spec.job_hints;
    request.origin = RequestOrigin::burn_in;
    for (int e = 0; e < spec.executions; ++e) {
      char run_id[64];
      std::snprintf(run_id, sizeof(run_id), "%s-x%02zu-r%04llu", workflow.name.c_str(), x,
                    static_cast<unsigned long long>(counter));
      RngStream rng = RngStream(seed).substream("sim-run", counter);
      auto run_records = simulate_execution(workflow, infra, request, run_id, rng, cfg.sim);
      records.insert(records.end(), run_records.begin(), run_records.end());
      ++counter;
    }
  }
  return records;
}

void cmd_simulate(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  const std::string path = out_path(cfg, "traces.csv");
  refuse_overwrite(cfg, path);
  const auto records = run_simulation(cfg);
  write_traces_csv(path, records);
}

namespace {

std::vector<GeneratedRun> build_sim_eval_runs(const WorkflowDesc& workflow,
                                              const InfrastructureDesc& infra,
                                              const SimOptions& options, const ClassMap& class_map,
                                              const AlConfig& al, const EvalConfig& eval) {
  SimSource source(workflow, infra, options, eval.seed, "eval-");
  RngStream rng = RngStream(eval.seed).substream("eval-requests");
  std::vector<GeneratedRun> runs;
  for (AnomalyType type : kInjectableTypes) {
    for (int i = 0; i < eval.runs_per_class; ++i) {
      ExperimentRequest request;
      request.workflow_name = workflow.name;
      request.executions = 1;
      request.origin = RequestOrigin::burn_in;
      const double magnitude = al.magnitude_grid[rng.uniform_index(al.magnitude_grid.size())];
      request.anomaly = AnomalyClass::make(type, magnitude);
      std::vector<std::string> compatible;
      for (const auto& [job, classes] : class_map) {
        if (std::find(classes.begin(), classes.end(), type) != classes.end()) {
          compatible.push_back(job);
        }
      }
      const std::size_t want = std::min<std::size_t>(al.hint_count, compatible.size());
      for (std::size_t index : rng.sample_without_replacement(compatible.size(), want)) {
        request.job_hints.push_back(compatible[index]);
      }
      std::sort(request.job_hints.begin(), request.job_hints.end());
      auto generated = source.generate(request, 0);
      runs.insert(runs.end(), std::make_move_iterator(generated.begin()),
                  std::make_move_iterator(generated.end()));
    }
  }
  for (int i = 0; i < eval.normal_runs; ++i) {
    ExperimentRequest request;
    request.workflow_name = workflow.name;
    request.executions = 1;
    request.origin = RequestOrigin::burn_in;
    auto generated = source.generate(request, 0);
    runs.insert(runs.end(), std::make_move_iterator(generated.begin()),
                std::make_move_iterator(generated.end()));
  }
  return runs;
}

// Collects per-iteration events for files and for in-process consumers.
class CollectingSink : public IterationSink {
 public:
  void on_iteration(const IterationEvent& event) override { events.push_back(event); }
  std::vector<IterationEvent> events;
};

std::unique_ptr<Model> make_model(const RunConfig& cfg, std::size_t input_dim,
                                  std::uint64_t seed) {
  RngStream init = RngStream(seed).substream("model-init");
  if (cfg.model == "gcn") {
    GcnConfig gcn;
    gcn.input_dim = input_dim;
    gcn.hidden = cfg.gcn_hidden;
    gcn.classes = cfg.gcn_classes;
    return std::make_unique<GcnModel>(gcn, init);
  }
  SslConfig ssl = cfg.ssl;
  ssl.input_dim = input_dim;
  return std::make_unique<SslModel>(ssl, init);
}

// Burn-in-shaped random pool: exactly the runs the active loop would generate
// under burn_in = K with the same seed, which is what makes the reduction
// check (baseline == all-burn-in active) hold bit for bit.
std::vector<GeneratedRun> build_sim_pool(const WorkflowDesc& workflow,
                                         const InfrastructureDesc& infra,
                                         const SimOptions& options, const ClassMap& class_map,
                                         const AlConfig& al, std::uint64_t seed, int pool_size) {
  SimSource source(workflow, infra, options, seed);
  std::vector<GeneratedRun> pool;
  int k = 1;
  while (static_cast<int>(pool.size()) < pool_size) {
    auto request = make_burnin_request(workflow, class_map, al, seed, k);
    auto runs = source.generate(request, k);
    for (auto& run : runs) {
      if (static_cast<int>(pool.size()) >= pool_size) break;
      pool.push_back(std::move(run));
    }
    ++k;
  }
  return pool;
}

}  // namespace

TrainOutcome run_training(const RunConfig& cfg, bool write_outputs) {
  const auto workflows = load_workflows(cfg.workflows_path, cfg.lax);
  const WorkflowDesc& workflow = pick_workflow(workflows, cfg.workflow_name);
  const ClassMap class_map = build_class_map(workflow);
  const FeatureSchema schema = FeatureSchema::with_defaults(workflow.job_types());

  AlConfig al = cfg.al;
  if (cfg.mode == "ablation") al.lambda = 0.0;

  // Raw eval runs are fixed across seeds; features are rebuilt per seed once
  // that seed's standardization stats freeze.
  std::vector<GeneratedRun> eval_runs;
  InfrastructureDesc infra;
  std::vector<PoolRun> replay_runs;
  if (cfg.backend == "sim") {
    infra = load_infrastructure(cfg.infrastructure_path, cfg.lax);
    eval_runs = build_sim_eval_runs(workflow, infra, cfg.sim, class_map, al, cfg.eval);
  } else {
    const auto records = parse_traces_csv_file(cfg.traces_path);
    auto pool_runs = pool_runs_from_records(records);
    for (const auto& run : pool_runs) {
      if (run.workflow != workflow.name) {
        raise(ErrorCode::unknown_workflow, "trace run '" + run.run_id + "' belongs to workflow '" +
                                               run.workflow + "', expected '" + workflow.name +
                                               "'");
      }
    }
    RngStream holdout_rng = RngStream(cfg.eval.seed).substream("eval-holdout");
    holdout_rng.shuffle(pool_runs);
    const std::size_t held =
        static_cast<std::size_t>(std::max(1.0, cfg.eval.holdout_fraction *
                                                   static_cast<double>(pool_runs.size())));
    if (held >= pool_runs.size()) {
      raise(ErrorCode::config_invalid, "holdout would consume the whole trace pool");
    }
    for (std::size_t i = 0; i < held; ++i) {
      eval_runs.push_back({pool_runs[i].run_id, pool_runs[i].records});
    }
    replay_runs.assign(pool_runs.begin() + held, pool_runs.end());
  }

  const int chunk = cfg.baseline_chunk > 0 ? cfg.baseline_chunk : al.executions_per_iteration;
  const int pool_size =
      cfg.baseline_pool > 0 ? cfg.baseline_pool : al.max_iterations * al.executions_per_iteration;

  TrainOutcome outcome;
  std::vector<ConfidenceHistogram> aggregated_histograms;
  for (const std::uint64_t seed : cfg.seeds) {
    LoopEnv env;
    env.seed = seed;
    env.mode = cfg.mode;
    env.schema = schema;
    env.class_map = class_map;
    env.top_k = cfg.top_k;
    env.classes = cfg.model == "gcn" ? cfg.gcn_classes : kAnomalyTypeCount;

    EvalSet eval_set;
    eval_set.runs = eval_runs;

    auto model = make_model(cfg, schema.dimension(), seed);
    CollectingSink sink;
    std::vector<MetricsRecord> history;

    if (cfg.mode == "baseline") {
      AlConfig baseline_al = al;
      baseline_al.executions_per_iteration = chunk;
      baseline_al.max_iterations = std::max(1, pool_size / chunk);
      std::vector<GeneratedRun> pool;
      if (cfg.backend == "sim") {
        pool = build_sim_pool(workflow, infra, cfg.sim, class_map, al, seed, pool_size);
      } else {
        TracePool trace_pool(replay_runs, RngStream(seed).substream("pool-shuffle"));
        const auto want = std::min<std::size_t>(pool_size, trace_pool.remaining());
        for (auto& run : trace_pool.take_sequential(static_cast<int>(want))) {
          pool.push_back({run.run_id, std::move(run.records)});
        }
      }
      history = run_baseline_loop(*model, workflow, std::move(pool), baseline_al, cfg.train,
                                  eval_set, env, &sink);
    } else {
      std::unique_ptr<DataSource> source;
      if (cfg.backend == "sim") {
        source = std::make_unique<SimSource>(workflow, infra, cfg.sim, seed);
      } else {
        source = std::make_unique<ReplaySource>(
            workflow, TracePool(replay_runs, RngStream(seed).substream("pool-shuffle")));
      }
      history = run_active_loop(*model, *source, al, cfg.train, eval_set, env, &sink);
    }

    if (write_outputs) {
      const std::string checkpoint_path =
          out_path(cfg, "checkpoint_seed" + std::to_string(seed) + ".json");
      refuse_overwrite(cfg, checkpoint_path);
      save_checkpoint(checkpoint_path, *model, seed);
    }

    for (const auto& event : sink.events) {
      ConfidenceHistogram hist =
          confidence_histogram(event.report.confidence, cfg.eval.histogram_bins);
      hist.iteration = event.iteration;
      bool merged = false;
      for (auto& existing : aggregated_histograms) {
        if (existing.iteration == hist.iteration) {
          for (std::size_t b = 0; b < existing.counts.size(); ++b) {
            existing.counts[b] += hist.counts[b];
          }
          merged = true;
          break;
        }
      }
      if (!merged) aggregated_histograms.push_back(std::move(hist));
    }

    outcome.all_metrics.insert(outcome.all_metrics.end(), history.begin(), history.end());
    outcome.per_seed.push_back({seed, std::move(history), std::move(sink.events)});
  }

  if (write_outputs) {
    const std::string metrics_path = out_path(cfg, "metrics.csv");
    const std::string histograms_path = out_path(cfg, "histograms.csv");
    refuse_overwrite(cfg, metrics_path);
    refuse_overwrite(cfg, histograms_path);
    std::ofstream metrics_out(metrics_path, std::ios::binary);
    if (!metrics_out) raise(ErrorCode::io_error, "cannot write '" + metrics_path + "'");
    write_metrics_csv(metrics_out, outcome.all_metrics);
    std::sort(aggregated_histograms.begin(), aggregated_histograms.end(),
              [](const ConfidenceHistogram& a, const ConfidenceHistogram& b) {
                return a.iteration < b.iteration;
              });
    std::ofstream hist_out(histograms_path, std::ios::binary);
    if (!hist_out) raise(ErrorCode::io_error, "cannot write '" + histograms_path + "'");
    write_histograms_csv(hist_out, aggregated_histograms);
  }
  return outcome;
}

void cmd_train(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  run_training(cfg, true);
}

std::vector<ReportRow> aggregate_metrics(const std::vector<MetricsRecord>& records) {
  std::map<std::pair<std::string, int>, std::vector<const MetricsRecord*>> groups;
  for (const auto& record : records) {
    groups[{record.mode, record.iteration}].push_back(&record);
  }
  std::vector<ReportRow> rows;
  for (const auto& [key, members] : groups) {
    ReportRow row;
    row.mode = key.first;
    row.iteration = key.second;
    row.seeds = static_cast<int>(members.size());
    row.auc_min = row.ap_min = row.top_k_min = 1e300;
    row.auc_max = row.ap_max = row.top_k_max = -1e300;
    for (const auto* record : members) {
      row.auc_mean += record->auc;
      row.ap_mean += record->average_precision;
      row.top_k_mean += record->top_k;
      row.auc_min = std::min(row.auc_min, record->auc);
      row.auc_max = std::max(row.auc_max, record->auc);
      row.ap_min = std::min(row.ap_min, record->average_precision);
      row.ap_max = std::max(row.ap_max, record->average_precision);
      row.top_k_min = std::min(row.top_k_min, record->top_k);
      row.top_k_max = std::max(row.top_k_max, record->top_k);
    }
    const double n = static_cast<double>(members.size());
    row.auc_mean /= n;
    row.ap_mean /= n;
    row.top_k_mean /= n;
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return a.mode != b.mode ? a.mode < b.mode : a.iteration < b.iteration;
  });
  return rows;
}

void cmd_report(const RunConfig& cfg) {
  std::vector<MetricsRecord> records;
  for (const auto& path : cfg.report_inputs) {
    const auto parsed = parse_metrics_csv_file(path);
    records.insert(records.end(), parsed.begin(), parsed.end());
  }
  const auto rows = aggregate_metrics(records);

  ensure_out_dir(cfg.out_dir);
  const std::string csv_path = out_path(cfg, "report.csv");
  const std::string json_path = out_path(cfg, "report.json");
  refuse_overwrite(cfg, csv_path);
  refuse_overwrite(cfg, json_path);

  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };

  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) raise(ErrorCode::io_error, "cannot write '" + csv_path + "'");
  csv << "mode,iteration,seeds,auc_mean,auc_min,auc_max,ap_mean,ap_min,ap_max,"
         "top_k_mean,top_k_min,top_k_max\n";
  for (const auto& row : rows) {
    csv << row.mode << ',' << row.iteration << ',' << row.seeds << ',' << fmt(row.auc_mean) << ','
        << fmt(row.auc_min) << ',' << fmt(row.auc_max) << ',' << fmt(row.ap_mean) << ','
        << fmt(row.ap_min) << ',' << fmt(row.ap_max) << ',' << fmt(row.top_k_mean) << ','
        << fmt(row.top_k_min) << ',' << fmt(row.top_k_max) << '\n';
  }
  csv.close();

  // Final-iteration summary per mode, plus the relative improvement of
  // active over baseline when both are present.
  json summary;
  summary["rows"] = json::array();
  std::map<std::string, ReportRow> finals;
  for (const auto& row : rows) {
    json j;
    j["mode"] = row.mode;
    j["iteration"] = row.iteration;
    j["seeds"] = row.seeds;
    j["auc"] = {{"mean", row.auc_mean}, {"min", row.auc_min}, {"max", row.auc_max}};
    j["average_precision"] = {{"mean", row.ap_mean}, {"min", row.ap_min}, {"max", row.ap_max}};
    j["top_k"] = {{"mean", row.top_k_mean}, {"min", row.top_k_min}, {"max", row.top_k_max}};
    summary["rows"].push_back(std::move(j));
    auto it = finals.find(row.mode);
    if (it == finals.end() || row.iteration > it->second.iteration) finals[row.mode] = row;
  }
  for (const auto& [mode, row] : finals) {
    summary["final"][mode] = {{"iteration", row.iteration}, {"auc_mean", row.auc_mean}};
  }
  if (finals.contains("active") && finals.contains("baseline") &&
      finals["baseline"].auc_mean > 0.0) {
    const double gain = finals["active"].auc_mean - finals["baseline"].auc_mean;
    summary["improvement"] = {
        {"auc_absolute", gain},
        {"auc_relative_percent", 100.0 * gain / finals["baseline"].auc_mean}};
  }
  std::ofstream json_out(json_path, std::ios::binary);
  if (!json_out) raise(ErrorCode::io_error, "cannot write '" + json_path + "'");
  json_out << summary.dump(2) << "\n";

  for (const auto& [mode, row] : finals) {
    std::cout << mode << ": final iteration " << row.iteration << ", mean AUC "
              << fmt(row.auc_mean) << "\n";
  }
  if (summary.contains("improvement")) {
    std::cout << "active vs baseline: " << fmt(summary["improvement"]["auc_absolute"]) << " AUC ("
              << fmt(summary["improvement"]["auc_relative_percent"]) << "%)\n";
  }
}

}  // namespace wfal
