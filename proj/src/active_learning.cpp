#include "wfal/active_learning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "wfal/error.hpp"
#include "wfal/featurize.hpp"

namespace wfal {

const char* to_string(RequestOrigin origin) {
  switch (origin) {
    case RequestOrigin::burn_in: return "burn_in";
    case RequestOrigin::random: return "random";
    case RequestOrigin::score_guided: return "score_guided";
  }
  return "burn_in";
}

void ExperimentRequest::validate() const {
  if (executions < 1) raise(ErrorCode::config_invalid, "request needs executions >= 1");
  if (origin == RequestOrigin::score_guided && job_hints.empty()) {
    raise(ErrorCode::config_invalid, "score-guided request without job hints");
  }
}

double AlConfig::beta_at(int k) const { return beta * std::pow(beta_decay, k - 1); }

void AlConfig::validate() const {
  if (max_iterations < 1) raise(ErrorCode::config_invalid, "K must be >= 1");
  if (burn_in < 1) raise(ErrorCode::config_invalid, "burn_in must be >= 1");
  if (threshold < 0.0) raise(ErrorCode::config_invalid, "threshold must be >= 0");
  if (!(beta > 0.0) || !(beta_decay > 0.0)) {
    raise(ErrorCode::config_invalid, "beta schedule must stay positive");
  }
  if (lambda < 0.0) raise(ErrorCode::config_invalid, "lambda must be >= 0");
  if (zeta < 0) raise(ErrorCode::config_invalid, "zeta must be >= 0");
  if (random_period < 1) raise(ErrorCode::config_invalid, "random_period must be >= 1");
  if (executions_per_iteration < 1) {
    raise(ErrorCode::config_invalid, "executions_per_iteration must be >= 1");
  }
  if (hint_count < 1) raise(ErrorCode::config_invalid, "hint_count must be >= 1");
  if (magnitude_grid.empty()) raise(ErrorCode::config_invalid, "magnitude grid is empty");
  for (double m : magnitude_grid) {
    if (!(m > 0.0 && m <= 1.0)) {
      raise(ErrorCode::config_invalid, "magnitude grid values must lie in (0,1]");
    }
  }
}

HEvaluation eval_cost_and_grads(const Model& model, const AccumulatedGraph& graph,
                                const AlConfig& cfg, const TrainConfig& train,
                                const EvalContext& ctx) {
  const double beta_k = cfg.beta_at(ctx.iteration);
  auto base = model.loss_and_grads(graph, ctx);

  HEvaluation out;
  out.terms.j = base.loss;
  out.terms.grad_task_norm = frobenius_norm(base.feature_grad);

  out.h_grads = base.param_grads;
  for (auto& g : out.h_grads) scale_in_place(g, beta_k);

  if (cfg.zeta > 0) {
    // dw = displacement after zeta plain gradient steps on a scratch copy;
    // delta_j = J(w + dw) - J(w). The displacement is treated as fixed, so
    // d(delta_j)/dw = grad J(w + dw) - grad J(w).
    const double eta = cfg.probe_step > 0.0 ? cfg.probe_step : train.learning_rate;
    auto probe = model.clone();
    auto probe_tensors = probe->tensors();
    const LossGrads* step_grads = &base;
    LossGrads scratch;
    for (int step = 0; step < cfg.zeta; ++step) {
      if (step > 0) {
        scratch = probe->loss_and_grads(graph, ctx);
        step_grads = &scratch;
      }
      for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
        axpy(*probe_tensors[t], -eta, step_grads->param_grads[t]);
      }
    }
    const auto probed = probe->loss_and_grads(graph, ctx);
    out.terms.delta_j = probed.loss - base.loss;
    for (std::size_t t = 0; t < out.h_grads.size(); ++t) {
      axpy(out.h_grads[t], 1.0, probed.param_grads[t]);
      axpy(out.h_grads[t], -1.0, base.param_grads[t]);
    }
  }

  if (cfg.lambda != 0.0 && out.terms.grad_task_norm > 0.0) {
    // d||grad_X J||/dw = <U, d(grad_X J)/dw> with U the unit task gradient:
    // a Hessian-vector product, estimated by central differences along U in
    // feature space (two extra backward passes).
    DenseMatrix direction = base.feature_grad;
    scale_in_place(direction, 1.0 / out.terms.grad_task_norm);
    const double eps = 1e-4 * std::max(1.0, max_abs(graph.features));

    AccumulatedGraph shifted = graph;
    shifted.features = graph.features;
    axpy(shifted.features, eps, direction);
    const auto plus = model.loss_and_grads(shifted, ctx);
    shifted.features = graph.features;
    axpy(shifted.features, -eps, direction);
    const auto minus = model.loss_and_grads(shifted, ctx);

    const double scale = cfg.lambda / (2.0 * eps);
    for (std::size_t t = 0; t < out.h_grads.size(); ++t) {
      axpy(out.h_grads[t], scale, plus.param_grads[t]);
      axpy(out.h_grads[t], -scale, minus.param_grads[t]);
    }
  }

  out.terms.h = beta_k * out.terms.j + out.terms.delta_j + cfg.lambda * out.terms.grad_task_norm;
  return out;
}

CostTerms eval_cost_H(const Model& model, const AccumulatedGraph& graph, const AlConfig& cfg,
                      const TrainConfig& train, const EvalContext& ctx) {
  return eval_cost_and_grads(model, graph, cfg, train, ctx).terms;
}

double ScoreReport::score_norm() const {
  double acc = 0.0;
  for (double s : raw) acc += s * s;
  return std::sqrt(acc);
}

ScoreReport compute_scores(const Model& model, const AccumulatedGraph& graph,
                           const EvalContext& ctx) {
  EvalContext full = ctx;
  full.loss_nodes = nullptr;
  const auto grads = model.loss_and_grads(graph, full);
  ScoreReport report;
  report.iteration = ctx.iteration;
  report.raw.resize(graph.n_nodes);
  for (std::size_t i = 0; i < graph.n_nodes; ++i) {
    report.raw[i] = row_norm(grads.feature_grad, i);
  }
  report.job_ids = graph.node_ids;
  return report;
}

void normalize_confidence(ScoreReport& report) {
  report.confidence.assign(report.raw.size(), 1.0);
  double max_score = 0.0;
  for (double s : report.raw) max_score = std::max(max_score, s);
  if (max_score <= 0.0) return;
  for (std::size_t i = 0; i < report.raw.size(); ++i) {
    report.confidence[i] = 1.0 - report.raw[i] / max_score;
  }
}

namespace {

std::map<AnomalyType, double> class_means(const ScoreReport& report) {
  std::map<AnomalyType, double> sums;
  std::map<AnomalyType, std::size_t> counts;
  for (std::size_t i = 0; i < report.confidence.size(); ++i) {
    for (AnomalyType type : report.node_classes[i]) {
      sums[type] += report.confidence[i];
      counts[type] += 1;
    }
  }
  std::map<AnomalyType, double> means;
  for (const auto& [type, sum] : sums) {
    means[type] = sum / static_cast<double>(counts[type]);
  }
  return means;
}

std::vector<std::vector<AnomalyType>> class_map_attribution(const ScoreReport& report,
                                                            const ClassMap& class_map) {
  std::vector<std::vector<AnomalyType>> node_classes(report.job_ids.size());
  for (std::size_t i = 0; i < report.job_ids.size(); ++i) {
    const auto it = class_map.find(report.job_ids[i]);
    if (it != class_map.end()) node_classes[i] = it->second;
  }
  return node_classes;
}

}  // namespace

void attach_class_attribution(ScoreReport& report, const Model& model,
                              const AccumulatedGraph& graph, const EvalContext& ctx,
                              const ClassMap& class_map) {
  if (report.confidence.size() != report.raw.size()) {
    raise(ErrorCode::empty_report, "confidences must be normalized before attribution");
  }
  report.node_classes.assign(report.job_ids.size(), {});
  bool predicted_any = false;
  const auto probs = model.class_probabilities(graph, ctx);
  if (probs && probs->cols() == static_cast<std::size_t>(kAnomalyTypeCount)) {
    for (std::size_t i = 0; i < graph.n_nodes; ++i) {
      std::size_t arg = 0;
      for (std::size_t c = 1; c < probs->cols(); ++c) {
        if ((*probs)(i, c) > (*probs)(i, arg)) arg = c;
      }
      if (arg != static_cast<std::size_t>(AnomalyType::normal)) {
        report.node_classes[i] = {static_cast<AnomalyType>(arg)};
        predicted_any = true;
      }
    }
  }
  if (!predicted_any) {
    // No usable class head (or nothing predicted anomalous yet): attribute
    // each node to every class its job can express.
    report.node_classes = class_map_attribution(report, class_map);
  }
  report.class_mean_confidence = class_means(report);
}

namespace {

double pick_magnitude(const AlConfig& cfg, RngStream& rng) {
  return cfg.magnitude_grid[rng.uniform_index(cfg.magnitude_grid.size())];
}

// The q lowest-confidence jobs compatible with `type`; per-job confidence is
// the mean over that job's nodes. Ordering ties break on the job id.
std::vector<std::string> lowest_confidence_jobs(const ScoreReport& report, AnomalyType type,
                                                const ClassMap& class_map, int q) {
  std::map<std::string, std::pair<double, std::size_t>> per_job;
  for (std::size_t i = 0; i < report.job_ids.size(); ++i) {
    auto& [sum, count] = per_job[report.job_ids[i]];
    sum += report.confidence[i];
    count += 1;
  }
  std::vector<std::pair<double, std::string>> candidates;
  for (const auto& [job, acc] : per_job) {
    const auto it = class_map.find(job);
    if (it == class_map.end()) continue;
    if (std::find(it->second.begin(), it->second.end(), type) == it->second.end()) continue;
    candidates.emplace_back(acc.first / static_cast<double>(acc.second), job);
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<std::string> hints;
  for (const auto& [confidence, job] : candidates) {
    (void)confidence;
    if (static_cast<int>(hints.size()) >= q) break;
    hints.push_back(job);
  }
  return hints;
}

std::vector<std::string> random_compatible_jobs(const ClassMap& class_map, AnomalyType type,
                                                int q, RngStream& rng) {
  std::vector<std::string> compatible;
  for (const auto& [job, classes] : class_map) {
    if (std::find(classes.begin(), classes.end(), type) != classes.end()) {
      compatible.push_back(job);
    }
  }
  if (compatible.empty()) return compatible;
  const std::size_t want = std::min<std::size_t>(q, compatible.size());
  const auto picked = rng.sample_without_replacement(compatible.size(), want);
  std::vector<std::string> hints;
  for (std::size_t index : picked) hints.push_back(compatible[index]);
  std::sort(hints.begin(), hints.end());
  return hints;
}

}  // namespace

ExperimentRequest translate_scores_to_request(const ScoreReport& report, int k,
                                              const AlConfig& cfg, const ClassMap& class_map,
                                              const std::string& workflow_name, RngStream rng) {
  if (report.raw.empty() || report.confidence.empty()) {
    raise(ErrorCode::empty_report, "cannot translate an empty score report");
  }
  ExperimentRequest request;
  request.workflow_name = workflow_name;
  request.executions = cfg.executions_per_iteration;

  AnomalyType type;
  if (k % cfg.random_period == 0) {
    type = kInjectableTypes[rng.uniform_index(4)];
    request.origin = RequestOrigin::random;
  } else if (!report.class_mean_confidence.empty()) {
    auto best = report.class_mean_confidence.begin();
    for (auto it = report.class_mean_confidence.begin();
         it != report.class_mean_confidence.end(); ++it) {
      if (it->second < best->second) best = it;  // ties keep the lower enum value
    }
    type = best->first;
    request.origin = RequestOrigin::score_guided;
  } else {
    type = kInjectableTypes[rng.uniform_index(4)];
    request.origin = RequestOrigin::random;
  }

  request.anomaly = AnomalyClass::make(type, pick_magnitude(cfg, rng));
  request.job_hints = lowest_confidence_jobs(report, type, class_map, cfg.hint_count);
  if (request.job_hints.empty()) {
    raise(ErrorCode::unknown_job_hint,
          std::string("no job is compatible with anomaly class '") + to_string(type) + "'");
  }
  request.validate();
  return request;
}

ExperimentRequest make_burnin_request(const WorkflowDesc& workflow, const ClassMap& class_map,
                                      const AlConfig& cfg, std::uint64_t seed, int k) {
  RngStream rng = RngStream(seed).substream("burnin", static_cast<std::uint64_t>(k));
  ExperimentRequest request;
  request.workflow_name = workflow.name;
  request.executions = cfg.executions_per_iteration;
  request.origin = RequestOrigin::burn_in;
  const AnomalyType type = kInjectableTypes[rng.uniform_index(4)];
  request.anomaly = AnomalyClass::make(type, pick_magnitude(cfg, rng));
  request.job_hints = random_compatible_jobs(class_map, type, cfg.hint_count, rng);
  request.validate();
  return request;
}

SimSource::SimSource(WorkflowDesc workflow, InfrastructureDesc infra, SimOptions options,
                     std::uint64_t seed, std::string run_prefix)
    : workflow_(std::move(workflow)),
      infra_(std::move(infra)),
      options_(options),
      seed_(seed),
      run_prefix_(std::move(run_prefix)) {}

std::vector<GeneratedRun> SimSource::generate(const ExperimentRequest& request, int iteration) {
  (void)iteration;
  request.validate();
  std::vector<GeneratedRun> runs;
  for (int e = 0; e < request.executions; ++e) {
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "r%04llu",
                  static_cast<unsigned long long>(counter_));
    GeneratedRun run;
    run.run_id = run_prefix_ + workflow_.name + "-" + suffix;
    RngStream rng = RngStream(seed_).substream("sim-run", counter_);
    run.records = simulate_execution(workflow_, infra_, request, run.run_id, rng, options_);
    runs.push_back(std::move(run));
    ++counter_;
  }
  return runs;
}

ReplaySource::ReplaySource(WorkflowDesc workflow, TracePool pool)
    : workflow_(std::move(workflow)), pool_(std::move(pool)) {}

std::vector<GeneratedRun> ReplaySource::generate(const ExperimentRequest& request, int iteration) {
  (void)iteration;
  auto selected = replay_select(pool_, request);
  std::vector<GeneratedRun> runs;
  for (auto& pool_run : selected) {
    runs.push_back({pool_run.run_id, std::move(pool_run.records)});
  }
  return runs;
}

PoolSource::PoolSource(WorkflowDesc workflow, std::vector<GeneratedRun> pool)
    : workflow_(std::move(workflow)), pool_(std::move(pool)) {}

std::vector<GeneratedRun> PoolSource::generate(const ExperimentRequest& request, int iteration) {
  (void)iteration;
  if (remaining() < static_cast<std::size_t>(request.executions)) {
    raise(ErrorCode::pool_exhausted, "baseline pool has " + std::to_string(remaining()) +
                                         " runs left, requested " +
                                         std::to_string(request.executions));
  }
  std::vector<GeneratedRun> runs;
  for (int e = 0; e < request.executions; ++e) runs.push_back(pool_[cursor_++]);
  return runs;
}

namespace {

std::vector<std::size_t> sample_loss_nodes(std::size_t n_nodes, int batch_nodes,
                                           std::uint64_t seed, int k) {
  const std::size_t want = std::min<std::size_t>(batch_nodes, n_nodes);
  RngStream rng = RngStream(seed).substream("node-batch", static_cast<std::uint64_t>(k));
  auto picked = rng.sample_without_replacement(n_nodes, want);
  std::sort(picked.begin(), picked.end());
  return picked;
}

void build_eval_features(EvalSet& eval_set, const WorkflowDesc& workflow,
                         const FeatureSchema& schema, const FeatureStats& stats, int classes) {
  if (eval_set.built) return;
  const JobTopology topology = workflow.topology();
  for (const auto& run : eval_set.runs) {
    auto result = featurize(run.records, topology, schema, stats);
    for (const auto& label : *result.graph.labels) {
      eval_set.labels.push_back(class_index_of(label, classes));
    }
    eval_set.graphs.push_back(accumulate({std::move(result.graph)}));
  }
  eval_set.built = true;
}

MetricsRecord evaluate_model(const Model& model, const EvalSet& eval_set, int k,
                             const LoopEnv& env, std::uint64_t samples_seen) {
  MetricsRecord record;
  record.mode = env.mode;
  record.seed = env.seed;
  record.iteration = k;
  record.samples_seen = samples_seen;
  record.k = env.top_k;

  EvalContext ctx{env.seed, k, nullptr};
  if (std::string(model.kind()) == "gcn") {
    DenseMatrix probs;
    std::vector<int> labels = eval_set.labels;
    std::size_t row = 0;
    for (std::size_t g = 0; g < eval_set.graphs.size(); ++g) {
      const auto p = model.class_probabilities(eval_set.graphs[g], ctx);
      if (g == 0) probs = DenseMatrix(labels.size(), p->cols());
      for (std::size_t i = 0; i < p->rows(); ++i, ++row) {
        for (std::size_t c = 0; c < p->cols(); ++c) probs(row, c) = (*p)(i, c);
      }
    }
    record.auc = macro_roc_auc(probs, labels);
    record.average_precision = macro_average_precision(probs, labels);
    record.top_k = top_k_precision(probs, labels, env.top_k);
  } else {
    std::vector<double> scores;
    std::vector<int> binary;
    DenseMatrix probs(eval_set.labels.size(), 2);
    std::size_t row = 0;
    for (const auto& graph : eval_set.graphs) {
      const auto node_scores = model.anomaly_scores(graph, ctx);
      for (double s : node_scores) {
        scores.push_back(s);
        probs(row, 1) = s / (1.0 + s);
        probs(row, 0) = 1.0 - probs(row, 1);
        ++row;
      }
    }
    for (int label : eval_set.labels) binary.push_back(label != 0 ? 1 : 0);
    record.auc = roc_auc(scores, binary);
    record.average_precision = average_precision(scores, binary);
    record.top_k = top_k_precision(probs, binary, std::min(env.top_k, 2));
    record.k = std::min(env.top_k, 2);
  }
  return record;
}

// The shared iteration engine. `force_burn_in` makes every request origin
// burn_in, which is exactly what the baseline schedule is.
std::vector<MetricsRecord> run_loop(Model& model, DataSource& source, const AlConfig& cfg,
                                    const TrainConfig& train, EvalSet& eval_set,
                                    const LoopEnv& env, IterationSink* sink, int iterations,
                                    bool force_burn_in) {
  cfg.validate();
  train.validate();
  const WorkflowDesc& workflow = source.workflow();
  AdamWState optimizer = make_adamw_state(
      static_cast<const Model&>(model).tensors());
  std::optional<FeatureStats> stats;
  ScoreReport previous_report;
  bool have_report = false;
  std::vector<MetricsRecord> history;
  std::uint64_t samples_seen = 0;

  for (int k = 1; k <= iterations; ++k) {
    ExperimentRequest request;
    if (force_burn_in || k <= cfg.burn_in || !have_report) {
      request = make_burnin_request(workflow, env.class_map, cfg, env.seed, k);
    } else {
      RngStream translate_rng =
          RngStream(env.seed).substream("translate", static_cast<std::uint64_t>(k));
      request = translate_scores_to_request(previous_report, k, cfg, env.class_map,
                                            workflow.name, translate_rng);
    }

    std::vector<GeneratedRun> runs;
    try {
      runs = source.generate(request, k);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::pool_exhausted) {
        raise(ErrorCode::pool_exhausted,
              "iteration " + std::to_string(k) + ": " + e.what());
      }
      raise(ErrorCode::backend_failure, "iteration " + std::to_string(k) + ": " + e.what());
    }

    std::size_t batch_records = 0;
    std::vector<TraceRecord> pooled;
    for (const auto& run : runs) {
      batch_records += run.records.size();
      pooled.insert(pooled.end(), run.records.begin(), run.records.end());
    }
    if (!stats) stats = fit_feature_stats(pooled, env.schema);

    const JobTopology topology = workflow.topology();
    std::vector<WorkflowGraph> graphs;
    for (const auto& run : runs) {
      graphs.push_back(featurize(run.records, topology, env.schema, stats).graph);
    }
    TaskBatch batch = make_task_batch(k, std::move(graphs));
    samples_seen += runs.size();

    const auto loss_nodes =
        sample_loss_nodes(batch.accumulated.n_nodes, train.batch_nodes, env.seed, k);
    EvalContext ctx{env.seed, k, &loss_nodes};

    const auto evaluation = eval_cost_and_grads(model, batch.accumulated, cfg, train, ctx);
    adamw_step(optimizer, model.tensors(), evaluation.h_grads, train);

    ScoreReport report = compute_scores(model, batch.accumulated, ctx);
    normalize_confidence(report);
    attach_class_attribution(report, model, batch.accumulated, ctx, env.class_map);
    previous_report = report;
    have_report = true;

    build_eval_features(eval_set, workflow, env.schema, *stats, env.classes);
    MetricsRecord metrics = evaluate_model(model, eval_set, k, env, samples_seen);
    history.push_back(metrics);

    if (sink != nullptr) {
      IterationEvent event;
      event.iteration = k;
      event.request = request;
      event.cost = evaluation.terms;
      event.report = report;
      event.metrics = metrics;
      event.batch_records = batch_records;
      event.batch_nodes = batch.accumulated.n_nodes;
      sink->on_iteration(event);
    }

    if (k > cfg.burn_in && report.score_norm() <= cfg.threshold) break;
  }
  return history;
}

}  // namespace

std::vector<MetricsRecord> run_active_loop(Model& model, DataSource& source, const AlConfig& cfg,
                                           const TrainConfig& train, EvalSet& eval_set,
                                           const LoopEnv& env, IterationSink* sink) {
  return run_loop(model, source, cfg, train, eval_set, env, sink, cfg.max_iterations, false);
}

std::vector<MetricsRecord> run_baseline_loop(Model& model, const WorkflowDesc& workflow,
                                             std::vector<GeneratedRun> pool, const AlConfig& cfg,
                                             const TrainConfig& train, EvalSet& eval_set,
                                             const LoopEnv& env, IterationSink* sink) {
  if (pool.empty()) raise(ErrorCode::pool_exhausted, "baseline pool is empty");
  const int per_batch = cfg.executions_per_iteration;
  const int feasible = static_cast<int>(pool.size()) / per_batch;
  const int iterations = std::min(cfg.max_iterations, feasible);
  if (iterations == 0) {
    raise(ErrorCode::pool_exhausted,
          "baseline pool of " + std::to_string(pool.size()) + " cannot fill a batch of " +
              std::to_string(per_batch));
  }
  PoolSource source(workflow, std::move(pool));
  return run_loop(model, source, cfg, train, eval_set, env, sink, iterations, true);
}

}  // namespace wfal
