#include "wfal/gcn.hpp"

#include <cmath>

#include "wfal/error.hpp"

namespace wfal {

namespace {

DenseMatrix glorot(std::size_t fan_in, std::size_t fan_out, RngStream& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  DenseMatrix m(fan_in, fan_out);
  for (double& v : m.data()) v = (2.0 * rng.uniform() - 1.0) * bound;
  return m;
}

std::vector<std::size_t> all_nodes(std::size_t n) {
  std::vector<std::size_t> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = i;
  return nodes;
}

void check_labels(const std::vector<int>& labels, std::size_t n, int classes) {
  if (labels.size() != n) {
    raise(ErrorCode::shape_mismatch, "label count does not match node count");
  }
  for (int label : labels) {
    if (label < 0 || label >= classes) {
      raise(ErrorCode::label_out_of_range,
            "label " + std::to_string(label) + " outside [0," + std::to_string(classes) + ")");
    }
  }
}

}  // namespace

int class_index_of(const AnomalyClass& label, int classes) {
  if (classes == 2) return label.is_normal() ? 0 : 1;
  return static_cast<int>(label.type);
}

GcnParams GcnParams::init(const GcnConfig& cfg, RngStream rng) {
  if (cfg.input_dim == 0 || cfg.hidden == 0 || cfg.classes < 2) {
    raise(ErrorCode::config_invalid, "gcn config needs input_dim, hidden > 0 and classes >= 2");
  }
  GcnParams p;
  const std::size_t c = static_cast<std::size_t>(cfg.classes);
  p.w1 = glorot(cfg.input_dim, cfg.hidden, rng);
  p.w2 = glorot(cfg.hidden, cfg.hidden, rng);
  p.mlp_w = glorot(cfg.hidden, c, rng);
  p.mlp_b = DenseMatrix(1, c);
  return p;
}

GcnTrace gcn_forward(const GcnParams& params, const DenseMatrix& adj, const DenseMatrix& x) {
  if (adj.rows() != adj.cols() || adj.rows() != x.rows()) {
    raise(ErrorCode::shape_mismatch, "gcn_forward: adjacency and features disagree");
  }
  if (x.cols() != params.w1.rows()) {
    raise(ErrorCode::shape_mismatch, "gcn_forward: feature dim does not match W1");
  }
  GcnTrace t;
  t.px = matmul(adj, x);
  t.a1 = matmul(t.px, params.w1);
  t.h1 = relu(t.a1);
  t.ph1 = matmul(adj, t.h1);
  t.a2 = matmul(t.ph1, params.w2);
  t.h2 = relu(t.a2);
  t.logits = matmul(t.h2, params.mlp_w);
  for (std::size_t i = 0; i < t.logits.rows(); ++i) {
    for (std::size_t j = 0; j < t.logits.cols(); ++j) t.logits(i, j) += params.mlp_b(0, j);
  }
  t.probabilities = softmax_rows(t.logits);
  return t;
}

double gcn_loss(const GcnTrace& trace, const std::vector<int>& labels,
                const std::vector<std::size_t>* loss_nodes) {
  check_labels(labels, trace.logits.rows(), static_cast<int>(trace.logits.cols()));
  const auto nodes = loss_nodes != nullptr ? *loss_nodes : all_nodes(trace.logits.rows());
  if (nodes.empty()) raise(ErrorCode::empty_input, "gcn_loss: empty node subset");
  const auto lse = log_sum_exp_rows(trace.logits);
  double sum = 0.0;
  for (std::size_t i : nodes) {
    sum += lse[i] - trace.logits(i, static_cast<std::size_t>(labels[i]));
  }
  return sum / static_cast<double>(nodes.size());
}

double cross_entropy(const DenseMatrix& probabilities, const std::vector<int>& labels) {
  check_labels(labels, probabilities.rows(), static_cast<int>(probabilities.cols()));
  if (probabilities.rows() == 0) raise(ErrorCode::empty_input, "cross_entropy: no rows");
  double sum = 0.0;
  for (std::size_t i = 0; i < probabilities.rows(); ++i) {
    const double p = probabilities(i, static_cast<std::size_t>(labels[i]));
    sum -= std::log(std::max(p, 1e-15));
  }
  return sum / static_cast<double>(probabilities.rows());
}

GcnGrads gcn_backward(const GcnParams& params, const DenseMatrix& adj, const DenseMatrix& x,
                      const GcnTrace& trace, const std::vector<int>& labels,
                      const std::vector<std::size_t>* loss_nodes) {
  if (trace.px.rows() != x.rows() || trace.logits.rows() != x.rows()) {
    raise(ErrorCode::trace_mismatch, "gcn_backward: trace does not match inputs");
  }
  check_labels(labels, x.rows(), static_cast<int>(trace.logits.cols()));
  const auto nodes = loss_nodes != nullptr ? *loss_nodes : all_nodes(x.rows());
  if (nodes.empty()) raise(ErrorCode::empty_input, "gcn_backward: empty node subset");
  const double inv = 1.0 / static_cast<double>(nodes.size());

  // d(loss)/d(logits) = (softmax - onehot) / |B| on the loss rows, 0 elsewhere.
  DenseMatrix dlogits(trace.logits.rows(), trace.logits.cols());
  for (std::size_t i : nodes) {
    for (std::size_t j = 0; j < dlogits.cols(); ++j) {
      dlogits(i, j) = trace.probabilities(i, j) * inv;
    }
    dlogits(i, static_cast<std::size_t>(labels[i])) -= inv;
  }

  GcnGrads g;
  g.mlp_w = matmul_at_b(trace.h2, dlogits);
  g.mlp_b = DenseMatrix(1, dlogits.cols());
  const auto bias_sums = column_sums(dlogits);
  for (std::size_t j = 0; j < dlogits.cols(); ++j) g.mlp_b(0, j) = bias_sums[j];

  DenseMatrix dh2 = matmul_a_bt(dlogits, params.mlp_w);
  DenseMatrix da2 = hadamard(dh2, relu_gate(trace.a2));
  g.w2 = matmul_at_b(trace.ph1, da2);

  DenseMatrix dph1 = matmul_a_bt(da2, params.w2);
  DenseMatrix dh1 = matmul_at_b(adj, dph1);
  DenseMatrix da1 = hadamard(dh1, relu_gate(trace.a1));
  g.w1 = matmul_at_b(trace.px, da1);

  DenseMatrix dpx = matmul_a_bt(da1, params.w1);
  g.features = matmul_at_b(adj, dpx);
  return g;
}

std::vector<int> GcnModel::labels_for(const AccumulatedGraph& graph) const {
  if (!graph.labels) {
    raise(ErrorCode::invariant_violation, "supervised model needs labeled graphs");
  }
  std::vector<int> labels(graph.n_nodes);
  for (std::size_t i = 0; i < graph.n_nodes; ++i) {
    labels[i] = class_index_of((*graph.labels)[i], cfg_.classes);
  }
  return labels;
}

double GcnModel::loss(const AccumulatedGraph& graph, const EvalContext& ctx) const {
  const auto trace = gcn_forward(params_, graph.normalized_adjacency, graph.features);
  return gcn_loss(trace, labels_for(graph), ctx.loss_nodes);
}

LossGrads GcnModel::loss_and_grads(const AccumulatedGraph& graph, const EvalContext& ctx) const {
  const auto labels = labels_for(graph);
  const auto trace = gcn_forward(params_, graph.normalized_adjacency, graph.features);
  auto grads = gcn_backward(params_, graph.normalized_adjacency, graph.features, trace, labels,
                            ctx.loss_nodes);
  LossGrads out;
  out.loss = gcn_loss(trace, labels, ctx.loss_nodes);
  out.param_grads.push_back(std::move(grads.w1));
  out.param_grads.push_back(std::move(grads.w2));
  out.param_grads.push_back(std::move(grads.mlp_w));
  out.param_grads.push_back(std::move(grads.mlp_b));
  out.feature_grad = std::move(grads.features);
  return out;
}

std::vector<DenseMatrix*> GcnModel::tensors() {
  return {&params_.w1, &params_.w2, &params_.mlp_w, &params_.mlp_b};
}

std::vector<const DenseMatrix*> GcnModel::tensors() const {
  return {&params_.w1, &params_.w2, &params_.mlp_w, &params_.mlp_b};
}

std::vector<std::string> GcnModel::tensor_names() const { return {"W1", "W2", "mlp_W", "mlp_b"}; }

std::unique_ptr<Model> GcnModel::clone() const { return std::make_unique<GcnModel>(*this); }

std::optional<DenseMatrix> GcnModel::class_probabilities(const AccumulatedGraph& graph,
                                                         const EvalContext&) const {
  return gcn_forward(params_, graph.normalized_adjacency, graph.features).probabilities;
}

std::vector<double> GcnModel::anomaly_scores(const AccumulatedGraph& graph,
                                             const EvalContext&) const {
  const auto trace = gcn_forward(params_, graph.normalized_adjacency, graph.features);
  std::vector<double> scores(graph.n_nodes);
  for (std::size_t i = 0; i < graph.n_nodes; ++i) {
    scores[i] = 1.0 - trace.probabilities(i, static_cast<std::size_t>(AnomalyType::normal));
  }
  return scores;
}

}  // namespace wfal
