#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "wfal/descriptors.hpp"
#include "wfal/metrics.hpp"
#include "wfal/model.hpp"
#include "wfal/optimizer.hpp"
#include "wfal/replay.hpp"
#include "wfal/request.hpp"
#include "wfal/simulator.hpp"
#include "wfal/trace.hpp"

namespace wfal {

struct AlConfig {
  int max_iterations = 10;  // K
  int burn_in = 1;
  double threshold = 0.0;  // stop when ||s||_2 <= threshold, post burn-in
  double beta = 1.0;       // beta_k = beta * beta_decay^(k-1)
  double beta_decay = 1.0;
  double lambda = 1.0;    // weight of the task-gradient term
  int zeta = 1;           // probe updates for the finite-difference term
  double probe_step = 0.0;  // <= 0: use the training learning rate
  int random_period = 5;    // R: every R-th request picks its class at random
  int executions_per_iteration = 2;
  int hint_count = 10;  // q lowest-confidence jobs per request
  std::vector<double> magnitude_grid = {0.1, 0.3, 0.5, 0.7, 0.9};

  double beta_at(int k) const;
  void validate() const;
};

// The pieces of the per-iteration cost
//   h = beta_k * j  +  (J(w + dw) - J(w))  +  lambda * ||grad_X J||_F.
struct CostTerms {
  double j = 0.0;
  double delta_j = 0.0;
  double grad_task_norm = 0.0;
  double h = 0.0;
};

struct HEvaluation {
  CostTerms terms;
  std::vector<DenseMatrix> h_grads;  // d h / d theta, per parameter tensor
};

// Evaluates the cost and its parameter gradient without touching the model:
// the probe displacement runs on a clone, and the gradient of the third term
// is a Hessian-vector product taken by central differences in feature space.
HEvaluation eval_cost_and_grads(const Model& model, const AccumulatedGraph& graph,
                                const AlConfig& cfg, const TrainConfig& train,
                                const EvalContext& ctx);

CostTerms eval_cost_H(const Model& model, const AccumulatedGraph& graph, const AlConfig& cfg,
                      const TrainConfig& train, const EvalContext& ctx);

// Per-node uncertainty and its [0,1] confidence complement, with per-class
// aggregates used by the translation layer.
struct ScoreReport {
  int iteration = 0;
  std::vector<double> raw;         // s_i = ||row_i(grad_X J)||_2
  std::vector<double> confidence;  // c_i = 1 - s_i / max s, or 1 when all zero
  std::vector<std::string> job_ids;
  std::vector<std::vector<AnomalyType>> node_classes;  // attribution per node
  std::map<AnomalyType, double> class_mean_confidence;

  double score_norm() const;  // ||s||_2
};

// Raw scores from the full-batch loss gradient (no node mask: uncertainty is
// reported for every node of the batch, training masks notwithstanding).
ScoreReport compute_scores(const Model& model, const AccumulatedGraph& graph,
                           const EvalContext& ctx);

void normalize_confidence(ScoreReport& report);

// Attribution: supervised models with a full class head group nodes by their
// predicted class; otherwise nodes attribute to every class their job can
// express per the class map.
void attach_class_attribution(ScoreReport& report, const Model& model,
                              const AccumulatedGraph& graph, const EvalContext& ctx,
                              const ClassMap& class_map);

// The translation layer: pick the anomaly class with the lowest mean
// confidence (or a random one every random_period-th iteration), aim it at
// the q lowest-confidence compatible jobs, draw a magnitude from the grid.
ExperimentRequest translate_scores_to_request(const ScoreReport& report, int k,
                                              const AlConfig& cfg, const ClassMap& class_map,
                                              const std::string& workflow_name, RngStream rng);

// A score-free request used during burn-in: random class, random magnitude,
// random compatible jobs.
ExperimentRequest make_burnin_request(const WorkflowDesc& workflow, const ClassMap& class_map,
                                      const AlConfig& cfg, std::uint64_t seed, int k);

// One generated run of raw trace rows.
struct GeneratedRun {
  std::string run_id;
  std::vector<TraceRecord> records;
};

// The data-generating function g. Implementations: the live-style simulator,
// the trace-replay pool, and the sequential pool used by baselines.
class DataSource {
 public:
  virtual ~DataSource() = default;
  virtual std::vector<GeneratedRun> generate(const ExperimentRequest& request, int iteration) = 0;
  virtual const WorkflowDesc& workflow() const = 0;
};

class SimSource : public DataSource {
 public:
  SimSource(WorkflowDesc workflow, InfrastructureDesc infra, SimOptions options,
            std::uint64_t seed, std::string run_prefix = "");

  std::vector<GeneratedRun> generate(const ExperimentRequest& request, int iteration) override;
  const WorkflowDesc& workflow() const override { return workflow_; }

 private:
  WorkflowDesc workflow_;
  InfrastructureDesc infra_;
  SimOptions options_;
  std::uint64_t seed_;
  std::string run_prefix_;
  std::uint64_t counter_ = 0;
};

class ReplaySource : public DataSource {
 public:
  ReplaySource(WorkflowDesc workflow, TracePool pool);

  std::vector<GeneratedRun> generate(const ExperimentRequest& request, int iteration) override;
  const WorkflowDesc& workflow() const override { return workflow_; }
  const TracePool& pool() const { return pool_; }

 private:
  WorkflowDesc workflow_;
  TracePool pool_;
};

// Ignores request content entirely and hands out the pool in order.
class PoolSource : public DataSource {
 public:
  PoolSource(WorkflowDesc workflow, std::vector<GeneratedRun> pool);

  std::vector<GeneratedRun> generate(const ExperimentRequest& request, int iteration) override;
  const WorkflowDesc& workflow() const override { return workflow_; }
  std::size_t remaining() const { return pool_.size() - cursor_; }

 private:
  WorkflowDesc workflow_;
  std::vector<GeneratedRun> pool_;
  std::size_t cursor_ = 0;
};

// Held-out runs evaluated every iteration. Features are built once the
// standardization stats freeze (after the first consumed batch).
struct EvalSet {
  std::vector<GeneratedRun> runs;
  bool built = false;
  std::vector<AccumulatedGraph> graphs;  // one per run
  std::vector<int> labels;               // pooled nodes, class indices
};

struct LoopEnv {
  std::uint64_t seed = 1;
  std::string mode = "active";  // active | baseline | ablation
  FeatureSchema schema;
  ClassMap class_map;
  int top_k = 1;
  int classes = 5;  // label space used for metrics on supervised models
};

struct IterationEvent {
  int iteration = 0;
  ExperimentRequest request;
  CostTerms cost;
  ScoreReport report;
  MetricsRecord metrics;
  std::size_t batch_records = 0;
  std::size_t batch_nodes = 0;
};

class IterationSink {
 public:
  virtual ~IterationSink() = default;
  virtual void on_iteration(const IterationEvent& event) = 0;
};

// Algorithm: for k = 1..K request data (burn-in: random; after: translated
// from the previous report), evaluate H, apply exactly one optimizer update
// on H, score the batch, record metrics, stop early once ||s|| falls under
// the threshold. Returns the per-iteration metric history.
std::vector<MetricsRecord> run_active_loop(Model& model, DataSource& source, const AlConfig& cfg,
                                           const TrainConfig& train, EvalSet& eval_set,
                                           const LoopEnv& env, IterationSink* sink = nullptr);

// Identical update schedule, tasks drawn sequentially from a fixed pool, no
// score feedback. Iteration count shrinks to what the pool can serve.
std::vector<MetricsRecord> run_baseline_loop(Model& model, const WorkflowDesc& workflow,
                                             std::vector<GeneratedRun> pool, const AlConfig& cfg,
                                             const TrainConfig& train, EvalSet& eval_set,
                                             const LoopEnv& env, IterationSink* sink = nullptr);

}  // namespace wfal
