#pragma once

#include "wfal/model.hpp"
#include "wfal/nnops.hpp"
#include "wfal/rng.hpp"

namespace wfal {

struct GcnConfig {
  std::size_t input_dim = 0;
  std::size_t hidden = 32;
  int classes = 5;
};

// Two graph convolutions followed by a linear head:
//   H1 = relu(A X W1), H2 = relu(A H1 W2), logits = H2 Wm + b.
struct GcnParams {
  DenseMatrix w1;     // d x h
  DenseMatrix w2;     // h x h
  DenseMatrix mlp_w;  // h x C
  DenseMatrix mlp_b;  // 1 x C

  static GcnParams init(const GcnConfig& cfg, RngStream rng);
};

// Cached activations of one forward pass, consumed by the backward pass.
struct GcnTrace {
  DenseMatrix px, a1, h1, ph1, a2, h2, logits, probabilities;
};

GcnTrace gcn_forward(const GcnParams& params, const DenseMatrix& adj, const DenseMatrix& x);

// Mean negative log likelihood over `loss_nodes` (all rows when null),
// computed from logits with the log-sum-exp trick.
double gcn_loss(const GcnTrace& trace, const std::vector<int>& labels,
                const std::vector<std::size_t>* loss_nodes);

// -(1/n) sum log p[i][label_i] on explicit probabilities, with an eps clamp.
double cross_entropy(const DenseMatrix& probabilities, const std::vector<int>& labels);

struct GcnGrads {
  DenseMatrix w1, w2, mlp_w, mlp_b;
  DenseMatrix features;  // n x d
};

GcnGrads gcn_backward(const GcnParams& params, const DenseMatrix& adj, const DenseMatrix& x,
                      const GcnTrace& trace, const std::vector<int>& labels,
                      const std::vector<std::size_t>* loss_nodes);

class GcnModel : public Model {
 public:
  GcnModel(const GcnConfig& cfg, RngStream rng) : cfg_(cfg), params_(GcnParams::init(cfg, rng)) {}
  GcnModel(const GcnConfig& cfg, GcnParams params) : cfg_(cfg), params_(std::move(params)) {}

  const char* kind() const override { return "gcn"; }
  const GcnConfig& config() const { return cfg_; }
  const GcnParams& params() const { return params_; }

  double loss(const AccumulatedGraph& graph, const EvalContext& ctx) const override;
  LossGrads loss_and_grads(const AccumulatedGraph& graph, const EvalContext& ctx) const override;

  std::vector<DenseMatrix*> tensors() override;
  std::vector<const DenseMatrix*> tensors() const override;
  std::vector<std::string> tensor_names() const override;
  std::unique_ptr<Model> clone() const override;

  std::optional<DenseMatrix> class_probabilities(const AccumulatedGraph& graph,
                                                 const EvalContext& ctx) const override;
  std::vector<double> anomaly_scores(const AccumulatedGraph& graph,
                                     const EvalContext& ctx) const override;

 private:
  std::vector<int> labels_for(const AccumulatedGraph& graph) const;

  GcnConfig cfg_;
  GcnParams params_;
};

}  // namespace wfal
