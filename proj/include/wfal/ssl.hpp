#pragma once

#include "wfal/model.hpp"
#include "wfal/nnops.hpp"
#include "wfal/rng.hpp"

namespace wfal {

struct SslConfig {
  std::size_t input_dim = 0;
  std::size_t hidden = 32;
  std::size_t latent = 16;
  std::size_t categories = 2;  // G
  double temperature = 0.5;
  double margin = 1.0;
  double mask_fraction = 0.15;  // rho, share of nodes perturbed per augmentation
  double noise_scale = 1.0;     // sigma_a, in standardized feature units
  int score_samples = 8;        // E
};

// Encoder: two graph convolutions into a z-dim embedding. The embedding is
// projected onto G latent categories, a Gumbel-softmax relaxation picks a
// category mix, and the mix of category code vectors (columns of Wg) feeds an
// MLP decoder back to feature space.
struct SslParams {
  DenseMatrix w1;  // d x h
  DenseMatrix w2;  // h x z
  DenseMatrix wg;  // z x G, doubles as the latent codebook
  DenseMatrix v1;  // z x h
  DenseMatrix c1;  // 1 x h
  DenseMatrix v2;  // h x d
  DenseMatrix c2;  // 1 x d

  static SslParams init(const SslConfig& cfg, RngStream rng);
};

// Per-path intermediates cached for the backward pass.
struct SslPathTrace {
  DenseMatrix px, ea1, eh1, ph1, ea2, embedding;
  DenseMatrix logits, relaxed;  // n x G
  DenseMatrix z;                // n x latent, sampled mixture
  DenseMatrix da1, dh1, xhat;
};

struct SslTrace {
  SslPathTrace clean;
  SslPathTrace aug;
  DenseMatrix gumbel_noise;  // n x G, shared by both paths
};

struct SslAugmented {
  DenseMatrix features;        // n x d
  std::vector<int> labels;     // 1 on perturbed rows
};

// Adds Gaussian noise of scale sigma to ceil(rho * n) rows picked via rng;
// labels mark the perturbed rows. rho = 0 is the identity.
SslAugmented augment_features(const DenseMatrix& features, double rho, double sigma,
                              RngStream& rng);

// Graph-level wrapper: adjacency unchanged, features perturbed as above.
std::pair<WorkflowGraph, std::vector<int>> ssl_augment(const WorkflowGraph& graph, double rho,
                                                       double sigma, RngStream& rng);

// Runs both paths with one shared Gumbel draw from rng, so identical inputs
// produce identical latents.
SslTrace ssl_forward(const SslParams& params, const SslConfig& cfg, const DenseMatrix& adj,
                     const DenseMatrix& x, const DenseMatrix& x_aug, RngStream& rng);

// Reconstruction error on the clean path, reconstruction error on the
// unperturbed augmented rows, and a margin term that pushes perturbed-row
// embeddings at least `margin` apart while pulling unperturbed ones together.
double ssl_loss(const DenseMatrix& z, const DenseMatrix& z_aug, const DenseMatrix& x,
                const DenseMatrix& xhat, const DenseMatrix& x_aug, const DenseMatrix& xhat_aug,
                const std::vector<int>& aug_labels, double margin);

// Same loss restricted to a node subset (all nodes when null).
double ssl_loss_masked(const SslTrace& trace, const DenseMatrix& x, const DenseMatrix& x_aug,
                       const std::vector<int>& aug_labels, double margin,
                       const std::vector<std::size_t>* loss_nodes);

struct SslGrads {
  DenseMatrix w1, w2, wg, v1, c1, v2, c2;
  DenseMatrix features;  // d(loss)/dX, both paths folded in
};

SslGrads ssl_backward(const SslParams& params, const SslConfig& cfg, const DenseMatrix& adj,
                      const DenseMatrix& x, const DenseMatrix& x_aug, const SslTrace& trace,
                      const std::vector<int>& aug_labels, double margin,
                      const std::vector<std::size_t>* loss_nodes);

// Mean reconstruction error per node over `samples` Monte-Carlo latent draws.
std::vector<double> ssl_anomaly_score(const SslParams& params, const SslConfig& cfg,
                                      const DenseMatrix& adj, const DenseMatrix& x,
                                      RngStream rng, int samples);

class SslModel : public Model {
 public:
  SslModel(const SslConfig& cfg, RngStream rng) : cfg_(cfg), params_(SslParams::init(cfg, rng)) {}
  SslModel(const SslConfig& cfg, SslParams params) : cfg_(cfg), params_(std::move(params)) {}

  const char* kind() const override { return "ssl"; }
  const SslConfig& config() const { return cfg_; }
  const SslParams& params() const { return params_; }

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
  SslAugmented augmented_for(const AccumulatedGraph& graph, const EvalContext& ctx) const;
  SslTrace forward_for(const AccumulatedGraph& graph, const DenseMatrix& x_aug,
                       const EvalContext& ctx) const;

  SslConfig cfg_;
  SslParams params_;
};

}  // namespace wfal
