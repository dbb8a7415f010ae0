#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wfal/active_learning.hpp"
#include "wfal/error.hpp"
#include "wfal/gcn.hpp"

using namespace wfal;
using wfal::testing::fd_gradient;

namespace {

// J = sum_i w . x_i over all loss nodes; gradient w.r.t. features is w per
// row. Small enough to hand-check every cost term.
class LinearModel : public Model {
 public:
  explicit LinearModel(DenseMatrix w) : w_(std::move(w)) {}

  const char* kind() const override { return "linear"; }

  double loss(const AccumulatedGraph& graph, const EvalContext& ctx) const override {
    double total = 0.0;
    const auto rows = ctx.loss_nodes;
    for (std::size_t i = 0; i < graph.n_nodes; ++i) {
      if (rows != nullptr && std::find(rows->begin(), rows->end(), i) == rows->end()) continue;
      for (std::size_t c = 0; c < graph.features.cols(); ++c) {
        total += w_(0, c) * graph.features(i, c);
      }
    }
    return total;
  }

  LossGrads loss_and_grads(const AccumulatedGraph& graph, const EvalContext& ctx) const override {
    LossGrads out;
    out.loss = loss(graph, ctx);
    DenseMatrix dw(1, w_.cols());
    DenseMatrix dx(graph.n_nodes, graph.features.cols());
    const auto rows = ctx.loss_nodes;
    for (std::size_t i = 0; i < graph.n_nodes; ++i) {
      if (rows != nullptr && std::find(rows->begin(), rows->end(), i) == rows->end()) continue;
      for (std::size_t c = 0; c < graph.features.cols(); ++c) {
        dw(0, c) += graph.features(i, c);
        dx(i, c) = w_(0, c);
      }
    }
    out.param_grads.push_back(std::move(dw));
    out.feature_grad = std::move(dx);
    return out;
  }

  std::vector<DenseMatrix*> tensors() override { return {&w_}; }
  std::vector<const DenseMatrix*> tensors() const override { return {&w_}; }
  std::vector<std::string> tensor_names() const override { return {"w"}; }
  std::unique_ptr<Model> clone() const override { return std::make_unique<LinearModel>(*this); }
  std::vector<double> anomaly_scores(const AccumulatedGraph& graph,
                                     const EvalContext&) const override {
    return std::vector<double>(graph.n_nodes, 0.0);
  }

 private:
  DenseMatrix w_;
};

AccumulatedGraph single_node_graph(std::vector<double> features) {
  WorkflowGraph g;
  g.workflow_name = "wf";
  g.run_id = "r";
  g.n_nodes = 1;
  g.node_ids = {"job0"};
  g.features = DenseMatrix(1, features.size());
  for (std::size_t c = 0; c < features.size(); ++c) g.features(0, c) = features[c];
  g.labels.emplace();
  g.labels->push_back(AnomalyClass::normal());
  return accumulate({g});
}

ScoreReport report_from_scores(std::vector<double> raw, std::vector<std::string> jobs) {
  ScoreReport report;
  report.raw = std::move(raw);
  report.job_ids = std::move(jobs);
  normalize_confidence(report);
  report.node_classes.assign(report.raw.size(), {});
  return report;
}

}  // namespace

TEST_CASE("eval_cost_H: disabled probe, plain-loss reduction, hand gradient norm") {
  LinearModel model(DenseMatrix{{3.0, 4.0}});
  const auto graph = single_node_graph({1.0, 1.0});
  TrainConfig train;
  EvalContext ctx{1, 1, nullptr};

  AlConfig off;
  off.zeta = 0;
  off.lambda = 0.0;
  const auto reduced = eval_cost_H(model, graph, off, train, ctx);
  CHECK(reduced.delta_j == 0.0);
  CHECK(reduced.h == reduced.j);  // beta = 1, lambda = 0, zeta = 0
  CHECK(reduced.j == doctest::Approx(7.0));

  AlConfig with_norm;
  with_norm.zeta = 0;
  with_norm.lambda = 2.0;
  const auto terms = eval_cost_H(model, graph, with_norm, train, ctx);
  // grad_X J = [3, 4] for the single node: Frobenius norm 5.
  CHECK(terms.grad_task_norm == doctest::Approx(5.0));
  CHECK(terms.h == doctest::Approx(terms.j + 2.0 * 5.0));

  // Probe enabled: one SGD step of size eta changes the loss by
  // J(w - eta g) - J(w) = -eta * x.x summed; here g = x = [1,1], eta = 0.5.
  AlConfig with_probe;
  with_probe.zeta = 1;
  with_probe.probe_step = 0.5;
  with_probe.lambda = 0.0;
  const auto probed = eval_cost_H(model, graph, with_probe, train, ctx);
  CHECK(probed.delta_j == doctest::Approx(-0.5 * 2.0));
  CHECK(probed.h == doctest::Approx(probed.j + probed.delta_j));
}

TEST_CASE("eval_cost_H leaves the model untouched") {
  LinearModel model(DenseMatrix{{3.0, 4.0}});
  const auto graph = single_node_graph({1.0, 1.0});
  AlConfig cfg;  // probe and lambda enabled
  TrainConfig train;
  eval_cost_H(model, graph, cfg, train, {1, 1, nullptr});
  const auto tensors = static_cast<const Model&>(model).tensors();
  CHECK((*tensors[0])(0, 0) == 3.0);
  CHECK((*tensors[0])(0, 1) == 4.0);
}

TEST_CASE("h-gradient matches finite differences of the full cost") {
  RngStream rng(42);
  WorkflowGraph g;
  g.workflow_name = "wf";
  g.run_id = "r";
  g.n_nodes = 4;
  g.features = DenseMatrix(4, 2);
  for (double& v : g.features.data()) v = rng.normal();
  g.labels.emplace();
  for (std::size_t i = 0; i < 4; ++i) {
    g.node_ids.push_back("j" + std::to_string(i));
    g.labels->push_back(i % 2 == 0 ? AnomalyClass::normal()
                                   : AnomalyClass::make(AnomalyType::cpu, 0.5));
  }
  const auto graph = accumulate({g});

  LinearModel model(DenseMatrix{{0.7, -1.2}});
  AlConfig cfg;
  cfg.zeta = 1;
  cfg.probe_step = 0.05;
  cfg.lambda = 0.8;
  TrainConfig train;
  EvalContext ctx{3, 2, nullptr};

  const auto evaluation = eval_cost_and_grads(model, graph, cfg, train, ctx);
  // For the linear model the probe term's gradient vanishes (J is linear in
  // w, so grad J(w+dw) == grad J(w)) and the third term is exactly
  // lambda * d||w||/dw scaled by sqrt(n) factors folded into the norm.
  auto mutable_model = model;
  auto h_of = [&]() {
    return eval_cost_H(mutable_model, graph, cfg, train, ctx).h;
  };
  auto tensors = mutable_model.tensors();
  const auto numeric = fd_gradient(*tensors[0], h_of, 1e-6);
  CHECK(wfal::testing::norm_relative_error(evaluation.h_grads[0], numeric) < 1e-5);
}

TEST_CASE("compute_scores: hand row norms, zero model, fd cross-check") {
  LinearModel model(DenseMatrix{{3.0, 4.0}});
  WorkflowGraph g;
  g.workflow_name = "wf";
  g.run_id = "r";
  g.n_nodes = 2;
  g.node_ids = {"a", "b"};
  g.features = DenseMatrix{{1.0, 0.0}, {0.0, 1.0}};
  g.labels.emplace();
  g.labels->assign(2, AnomalyClass::normal());
  const auto graph = accumulate({g});

  const auto report = compute_scores(model, graph, {1, 1, nullptr});
  CHECK(report.raw[0] == doctest::Approx(5.0));
  CHECK(report.raw[1] == doctest::Approx(5.0));

  LinearModel zero(DenseMatrix{{0.0, 0.0}});
  const auto zero_report = compute_scores(zero, graph, {1, 1, nullptr});
  for (double s : zero_report.raw) CHECK(s == 0.0);

  // Per-node finite differences of J w.r.t. features reproduce the rows.
  AccumulatedGraph mutable_graph = graph;
  EvalContext ctx{1, 1, nullptr};
  auto loss_fn = [&]() { return model.loss(mutable_graph, ctx); };
  const auto fd = fd_gradient(mutable_graph.features, loss_fn);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(report.raw[i] == doctest::Approx(row_norm(fd, i)).epsilon(1e-5));
  }
}

TEST_CASE("normalize_confidence: formula, all-zero case, scale invariance") {
  auto report = report_from_scores({5.0, 0.0}, {"a", "b"});
  CHECK(report.confidence[0] == doctest::Approx(0.0));
  CHECK(report.confidence[1] == doctest::Approx(1.0));

  auto zero = report_from_scores({0.0, 0.0, 0.0}, {"a", "b", "c"});
  for (double c : zero.confidence) CHECK(c == 1.0);

  auto scaled = report_from_scores({50.0, 0.0}, {"a", "b"});
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(scaled.confidence[i] == doctest::Approx(report.confidence[i]));
  }
}

namespace {

ClassMap simple_class_map() {
  ClassMap map;
  map["a"] = {AnomalyType::cpu, AnomalyType::hdd, AnomalyType::net_loss, AnomalyType::net_dup};
  map["b"] = {AnomalyType::cpu, AnomalyType::hdd};
  map["c"] = {AnomalyType::cpu, AnomalyType::net_loss, AnomalyType::net_dup};
  return map;
}

}  // namespace

TEST_CASE("translate_scores_to_request: argmin class, tie break, random period") {
  AlConfig cfg;
  cfg.random_period = 5;
  cfg.hint_count = 2;
  auto report = report_from_scores({1.0, 0.5, 0.0}, {"a", "b", "c"});
  report.class_mean_confidence = {{AnomalyType::cpu, 0.3},
                                  {AnomalyType::hdd, 0.8},
                                  {AnomalyType::net_loss, 0.9}};

  const auto request = translate_scores_to_request(report, 3, cfg, simple_class_map(), "wf",
                                                   RngStream(1).substream("translate", 3));
  CHECK(request.anomaly.type == AnomalyType::cpu);
  CHECK(request.origin == RequestOrigin::score_guided);
  CHECK(request.workflow_name == "wf");
  // Lowest-confidence cpu-compatible jobs: a (c=0), b (c=0.5).
  REQUIRE(request.job_hints.size() == 2);
  CHECK(request.job_hints[0] == "a");
  CHECK(request.job_hints[1] == "b");

  report.class_mean_confidence = {{AnomalyType::cpu, 0.5}, {AnomalyType::hdd, 0.5}};
  const auto tied = translate_scores_to_request(report, 3, cfg, simple_class_map(), "wf",
                                                RngStream(1).substream("translate", 3));
  CHECK(tied.anomaly.type == AnomalyType::cpu);  // lower enum value wins

  // k divisible by R picks at random, reproducibly.
  const auto r1 = translate_scores_to_request(report, 5, cfg, simple_class_map(), "wf",
                                              RngStream(9).substream("translate", 5));
  const auto r2 = translate_scores_to_request(report, 5, cfg, simple_class_map(), "wf",
                                              RngStream(9).substream("translate", 5));
  CHECK(r1.origin == RequestOrigin::random);
  CHECK(r1.anomaly.type == r2.anomaly.type);
  CHECK(r1.anomaly.magnitude == r2.anomaly.magnitude);
  CHECK(r1.job_hints == r2.job_hints);

  ScoreReport empty;
  CHECK_THROWS_AS(translate_scores_to_request(empty, 3, cfg, simple_class_map(), "wf",
                                              RngStream(1)),
                  Error);
}

TEST_CASE("confidence scale invariance carries to the chosen class") {
  AlConfig cfg;
  auto report = report_from_scores({4.0, 2.0, 0.0}, {"a", "b", "c"});
  report.node_classes = {{AnomalyType::cpu}, {AnomalyType::hdd}, {AnomalyType::net_loss}};
  report.class_mean_confidence.clear();
  for (std::size_t i = 0; i < 3; ++i) {
    report.class_mean_confidence[report.node_classes[i][0]] = report.confidence[i];
  }
  auto scaled = report_from_scores({400.0, 200.0, 0.0}, {"a", "b", "c"});
  scaled.node_classes = report.node_classes;
  for (std::size_t i = 0; i < 3; ++i) {
    scaled.class_mean_confidence[scaled.node_classes[i][0]] = scaled.confidence[i];
  }
  const auto a = translate_scores_to_request(report, 2, cfg, simple_class_map(), "wf",
                                             RngStream(4).substream("translate", 2));
  const auto b = translate_scores_to_request(scaled, 2, cfg, simple_class_map(), "wf",
                                             RngStream(4).substream("translate", 2));
  CHECK(a.anomaly.type == b.anomaly.type);
}

TEST_CASE("burn-in requests are deterministic given (seed, k)") {
  const char* json = R"({
    "workflows": [{"name": "w", "jobs": [
      {"id": "a", "type": "t", "base_runtime_s": 1.0, "cpu_fraction": 0.5,
       "io_bytes": 1, "transfer_bytes": 1, "parents": []},
      {"id": "b", "type": "t", "base_runtime_s": 1.0, "cpu_fraction": 0.5,
       "io_bytes": 1, "transfer_bytes": 1, "parents": ["a"]}]}]
  })";
  const auto workflow = parse_workflows_json(json).front();
  const auto class_map = build_class_map(workflow);
  AlConfig cfg;
  const auto r1 = make_burnin_request(workflow, class_map, cfg, 7, 3);
  const auto r2 = make_burnin_request(workflow, class_map, cfg, 7, 3);
  CHECK(r1.anomaly.type == r2.anomaly.type);
  CHECK(r1.anomaly.magnitude == r2.anomaly.magnitude);
  CHECK(r1.job_hints == r2.job_hints);
  CHECK(r1.origin == RequestOrigin::burn_in);
  const auto r3 = make_burnin_request(workflow, class_map, cfg, 7, 4);
  const bool differs = r3.anomaly.type != r1.anomaly.type ||
                       r3.anomaly.magnitude != r1.anomaly.magnitude ||
                       r3.job_hints != r1.job_hints;
  CHECK(differs);
}
