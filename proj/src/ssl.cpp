#include "wfal/ssl.hpp"

#include <algorithm>
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

void add_bias_rows(DenseMatrix& m, const DenseMatrix& bias) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) += bias(0, j);
  }
}

SslPathTrace run_path(const SslParams& params, const SslConfig& cfg, const DenseMatrix& adj,
                      const DenseMatrix& x, const DenseMatrix& noise) {
  SslPathTrace t;
  t.px = matmul(adj, x);
  t.ea1 = matmul(t.px, params.w1);
  t.eh1 = relu(t.ea1);
  t.ph1 = matmul(adj, t.eh1);
  t.ea2 = matmul(t.ph1, params.w2);
  t.embedding = relu(t.ea2);
  t.logits = matmul(t.embedding, params.wg);
  t.relaxed = gumbel_softmax_with_noise(t.logits, cfg.temperature, noise);
  t.z = matmul_a_bt(t.relaxed, params.wg);
  t.da1 = matmul(t.z, params.v1);
  add_bias_rows(t.da1, params.c1);
  t.dh1 = relu(t.da1);
  t.xhat = matmul(t.dh1, params.v2);
  add_bias_rows(t.xhat, params.c2);
  return t;
}

}  // namespace

SslParams SslParams::init(const SslConfig& cfg, RngStream rng) {
  if (cfg.input_dim == 0 || cfg.hidden == 0 || cfg.latent == 0 || cfg.categories < 2) {
    raise(ErrorCode::config_invalid, "ssl config needs positive dims and >= 2 categories");
  }
  if (!(cfg.temperature > 0.0)) {
    raise(ErrorCode::non_positive_temperature, "ssl temperature must be > 0");
  }
  if (!(cfg.margin > 0.0)) raise(ErrorCode::config_invalid, "ssl margin must be > 0");
  SslParams p;
  p.w1 = glorot(cfg.input_dim, cfg.hidden, rng);
  p.w2 = glorot(cfg.hidden, cfg.latent, rng);
  p.wg = glorot(cfg.latent, cfg.categories, rng);
  p.v1 = glorot(cfg.latent, cfg.hidden, rng);
  p.c1 = DenseMatrix(1, cfg.hidden);
  p.v2 = glorot(cfg.hidden, cfg.input_dim, rng);
  p.c2 = DenseMatrix(1, cfg.input_dim);
  return p;
}

SslAugmented augment_features(const DenseMatrix& features, double rho, double sigma,
                              RngStream& rng) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    raise(ErrorCode::out_of_range_value, "mask fraction must lie in [0,1]");
  }
  if (sigma < 0.0) raise(ErrorCode::out_of_range_value, "noise scale must be >= 0");
  SslAugmented out;
  out.features = features;
  out.labels.assign(features.rows(), 0);
  const std::size_t n = features.rows();
  const std::size_t count = static_cast<std::size_t>(std::ceil(rho * static_cast<double>(n)));
  if (count == 0) return out;
  auto picked = rng.sample_without_replacement(n, count);
  std::sort(picked.begin(), picked.end());
  for (std::size_t i : picked) {
    out.labels[i] = 1;
    for (std::size_t j = 0; j < features.cols(); ++j) {
      out.features(i, j) += sigma * rng.normal();
    }
  }
  return out;
}

std::pair<WorkflowGraph, std::vector<int>> ssl_augment(const WorkflowGraph& graph, double rho,
                                                       double sigma, RngStream& rng) {
  auto augmented = augment_features(graph.features, rho, sigma, rng);
  WorkflowGraph out = graph;
  out.features = std::move(augmented.features);
  return {std::move(out), std::move(augmented.labels)};
}

SslTrace ssl_forward(const SslParams& params, const SslConfig& cfg, const DenseMatrix& adj,
                     const DenseMatrix& x, const DenseMatrix& x_aug, RngStream& rng) {
  if (!x.same_shape(x_aug)) {
    raise(ErrorCode::shape_mismatch, "ssl_forward: clean and augmented features disagree");
  }
  if (adj.rows() != adj.cols() || adj.rows() != x.rows()) {
    raise(ErrorCode::shape_mismatch, "ssl_forward: adjacency and features disagree");
  }
  SslTrace trace;
  trace.gumbel_noise = DenseMatrix(x.rows(), cfg.categories);
  for (double& v : trace.gumbel_noise.data()) v = rng.gumbel();
  trace.clean = run_path(params, cfg, adj, x, trace.gumbel_noise);
  trace.aug = run_path(params, cfg, adj, x_aug, trace.gumbel_noise);
  return trace;
}

double ssl_loss(const DenseMatrix& z, const DenseMatrix& z_aug, const DenseMatrix& x,
                const DenseMatrix& xhat, const DenseMatrix& x_aug, const DenseMatrix& xhat_aug,
                const std::vector<int>& aug_labels, double margin) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (aug_labels.size() != n) {
    raise(ErrorCode::shape_mismatch, "ssl_loss: label count does not match rows");
  }
  if (n == 0) raise(ErrorCode::empty_input, "ssl_loss: no rows");

  double recon = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double e = x(i, j) - xhat(i, j);
      recon += e * e;
    }
  }
  recon /= static_cast<double>(n * d);

  double recon_aug = 0.0;
  std::size_t unperturbed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (aug_labels[i] != 0) continue;
    ++unperturbed;
    for (std::size_t j = 0; j < d; ++j) {
      const double e = x_aug(i, j) - xhat_aug(i, j);
      recon_aug += e * e;
    }
  }
  if (unperturbed > 0) recon_aug /= static_cast<double>(unperturbed * d);

  double margin_term = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dist_sq = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) {
      const double e = z(i, j) - z_aug(i, j);
      dist_sq += e * e;
    }
    const double dist = std::sqrt(dist_sq);
    margin_term += aug_labels[i] != 0 ? std::max(0.0, margin - dist) : dist;
  }
  margin_term /= static_cast<double>(n);

  return recon + recon_aug + margin_term;
}

double ssl_loss_masked(const SslTrace& trace, const DenseMatrix& x, const DenseMatrix& x_aug,
                       const std::vector<int>& aug_labels, double margin,
                       const std::vector<std::size_t>* loss_nodes) {
  const auto nodes = loss_nodes != nullptr ? *loss_nodes : all_nodes(x.rows());
  if (nodes.empty()) raise(ErrorCode::empty_input, "ssl_loss_masked: empty node subset");
  const std::size_t d = x.cols();
  const double nb = static_cast<double>(nodes.size());

  double recon = 0.0;
  for (std::size_t i : nodes) {
    for (std::size_t j = 0; j < d; ++j) {
      const double e = x(i, j) - trace.clean.xhat(i, j);
      recon += e * e;
    }
  }
  recon /= nb * static_cast<double>(d);

  double recon_aug = 0.0;
  std::size_t unperturbed = 0;
  for (std::size_t i : nodes) {
    if (aug_labels[i] != 0) continue;
    ++unperturbed;
    for (std::size_t j = 0; j < d; ++j) {
      const double e = x_aug(i, j) - trace.aug.xhat(i, j);
      recon_aug += e * e;
    }
  }
  if (unperturbed > 0) recon_aug /= static_cast<double>(unperturbed * d);

  double margin_term = 0.0;
  for (std::size_t i : nodes) {
    double dist_sq = 0.0;
    for (std::size_t j = 0; j < trace.clean.z.cols(); ++j) {
      const double e = trace.clean.z(i, j) - trace.aug.z(i, j);
      dist_sq += e * e;
    }
    const double dist = std::sqrt(dist_sq);
    margin_term += aug_labels[i] != 0 ? std::max(0.0, margin - dist) : dist;
  }
  margin_term /= nb;

  return recon + recon_aug + margin_term;
}

namespace {

// Pushes one path's reconstruction/latent gradients back to parameters and to
// the path's input features.
struct PathBackward {
  DenseMatrix features;  // d(loss)/d(path input)
};

PathBackward backward_path(const SslParams& params, const SslConfig& cfg, const DenseMatrix& adj,
                           const SslPathTrace& t, const DenseMatrix& dxhat, DenseMatrix dz,
                           SslGrads& grads) {
  // Decoder.
  axpy(grads.v2, 1.0, matmul_at_b(t.dh1, dxhat));
  const auto dc2 = column_sums(dxhat);
  for (std::size_t j = 0; j < grads.c2.cols(); ++j) grads.c2(0, j) += dc2[j];
  DenseMatrix ddh1 = matmul_a_bt(dxhat, params.v2);
  DenseMatrix dda1 = hadamard(ddh1, relu_gate(t.da1));
  axpy(grads.v1, 1.0, matmul_at_b(t.z, dda1));
  const auto dc1 = column_sums(dda1);
  for (std::size_t j = 0; j < grads.c1.cols(); ++j) grads.c1(0, j) += dc1[j];
  add_in_place(dz, matmul_a_bt(dda1, params.v1));

  // Latent mixture z = relaxed * Wg^T.
  DenseMatrix drelaxed = matmul(dz, params.wg);
  axpy(grads.wg, 1.0, matmul_at_b(dz, t.relaxed));
  DenseMatrix dlogits = softmax_rows_backward(t.relaxed, drelaxed);
  scale_in_place(dlogits, 1.0 / cfg.temperature);
  axpy(grads.wg, 1.0, matmul_at_b(t.embedding, dlogits));
  DenseMatrix dembedding = matmul_a_bt(dlogits, params.wg);

  // Encoder.
  DenseMatrix dea2 = hadamard(dembedding, relu_gate(t.ea2));
  axpy(grads.w2, 1.0, matmul_at_b(t.ph1, dea2));
  DenseMatrix dph1 = matmul_a_bt(dea2, params.w2);
  DenseMatrix deh1 = matmul_at_b(adj, dph1);
  DenseMatrix dea1 = hadamard(deh1, relu_gate(t.ea1));
  axpy(grads.w1, 1.0, matmul_at_b(t.px, dea1));
  DenseMatrix dpx = matmul_a_bt(dea1, params.w1);
  PathBackward out;
  out.features = matmul_at_b(adj, dpx);
  return out;
}

}  // namespace

SslGrads ssl_backward(const SslParams& params, const SslConfig& cfg, const DenseMatrix& adj,
                      const DenseMatrix& x, const DenseMatrix& x_aug, const SslTrace& trace,
                      const std::vector<int>& aug_labels, double margin,
                      const std::vector<std::size_t>* loss_nodes) {
  if (trace.clean.xhat.rows() != x.rows()) {
    raise(ErrorCode::trace_mismatch, "ssl_backward: trace does not match inputs");
  }
  const auto nodes = loss_nodes != nullptr ? *loss_nodes : all_nodes(x.rows());
  if (nodes.empty()) raise(ErrorCode::empty_input, "ssl_backward: empty node subset");
  const std::size_t d = x.cols();
  const double nb = static_cast<double>(nodes.size());

  SslGrads grads;
  grads.w1 = DenseMatrix(params.w1.rows(), params.w1.cols());
  grads.w2 = DenseMatrix(params.w2.rows(), params.w2.cols());
  grads.wg = DenseMatrix(params.wg.rows(), params.wg.cols());
  grads.v1 = DenseMatrix(params.v1.rows(), params.v1.cols());
  grads.c1 = DenseMatrix(1, params.c1.cols());
  grads.v2 = DenseMatrix(params.v2.rows(), params.v2.cols());
  grads.c2 = DenseMatrix(1, params.c2.cols());
  grads.features = DenseMatrix(x.rows(), d);

  std::size_t unperturbed = 0;
  for (std::size_t i : nodes) unperturbed += aug_labels[i] == 0 ? 1 : 0;

  // Clean reconstruction term.
  DenseMatrix dxhat_clean(x.rows(), d);
  const double w_clean = 2.0 / (nb * static_cast<double>(d));
  for (std::size_t i : nodes) {
    for (std::size_t j = 0; j < d; ++j) {
      const double e = trace.clean.xhat(i, j) - x(i, j);
      dxhat_clean(i, j) = w_clean * e;
      grads.features(i, j) += w_clean * (x(i, j) - trace.clean.xhat(i, j));
    }
  }

  // Augmented reconstruction term (unperturbed rows only). The target X_aug
  // equals X plus fixed noise, so its gradient also lands on X.
  DenseMatrix dxhat_aug(x.rows(), d);
  DenseMatrix dx_aug_direct(x.rows(), d);
  if (unperturbed > 0) {
    const double w_aug = 2.0 / (static_cast<double>(unperturbed) * static_cast<double>(d));
    for (std::size_t i : nodes) {
      if (aug_labels[i] != 0) continue;
      for (std::size_t j = 0; j < d; ++j) {
        const double e = trace.aug.xhat(i, j) - x_aug(i, j);
        dxhat_aug(i, j) = w_aug * e;
        dx_aug_direct(i, j) = -w_aug * e;
      }
    }
  }

  // Margin term on the sampled latents.
  DenseMatrix dz_clean(x.rows(), trace.clean.z.cols());
  DenseMatrix dz_aug(x.rows(), trace.clean.z.cols());
  for (std::size_t i : nodes) {
    double dist_sq = 0.0;
    for (std::size_t j = 0; j < trace.clean.z.cols(); ++j) {
      const double e = trace.clean.z(i, j) - trace.aug.z(i, j);
      dist_sq += e * e;
    }
    const double dist = std::sqrt(dist_sq);
    if (dist == 0.0) continue;  // subgradient 0 at the kink
    double toward_clean;        // coefficient on v/dist applied to dz_clean
    if (aug_labels[i] != 0) {
      if (dist >= margin) continue;
      toward_clean = -1.0 / nb;  // push apart while inside the margin
    } else {
      toward_clean = 1.0 / nb;  // pull together
    }
    for (std::size_t j = 0; j < trace.clean.z.cols(); ++j) {
      const double unit = (trace.clean.z(i, j) - trace.aug.z(i, j)) / dist;
      dz_clean(i, j) += toward_clean * unit;
      dz_aug(i, j) -= toward_clean * unit;
    }
  }

  const auto clean_back =
      backward_path(params, cfg, adj, trace.clean, dxhat_clean, std::move(dz_clean), grads);
  const auto aug_back =
      backward_path(params, cfg, adj, trace.aug, dxhat_aug, std::move(dz_aug), grads);

  add_in_place(grads.features, clean_back.features);
  add_in_place(grads.features, aug_back.features);
  add_in_place(grads.features, dx_aug_direct);
  return grads;
}

std::vector<double> ssl_anomaly_score(const SslParams& params, const SslConfig& cfg,
                                      const DenseMatrix& adj, const DenseMatrix& x,
                                      RngStream rng, int samples) {
  if (samples < 1) raise(ErrorCode::config_invalid, "score_samples must be >= 1");
  std::vector<double> scores(x.rows(), 0.0);
  for (int e = 0; e < samples; ++e) {
    RngStream draw = rng.substream("mc", static_cast<std::uint64_t>(e));
    DenseMatrix noise(x.rows(), cfg.categories);
    for (double& v : noise.data()) v = draw.gumbel();
    const auto path = run_path(params, cfg, adj, x, noise);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double err = 0.0;
      for (std::size_t j = 0; j < x.cols(); ++j) {
        const double diff = x(i, j) - path.xhat(i, j);
        err += diff * diff;
      }
      scores[i] += err;
    }
  }
  for (double& s : scores) s /= static_cast<double>(samples);
  return scores;
}

SslAugmented SslModel::augmented_for(const AccumulatedGraph& graph, const EvalContext& ctx) const {
  RngStream rng = RngStream(ctx.seed).substream("ssl-aug", static_cast<std::uint64_t>(ctx.iteration));
  return augment_features(graph.features, cfg_.mask_fraction, cfg_.noise_scale, rng);
}

SslTrace SslModel::forward_for(const AccumulatedGraph& graph, const DenseMatrix& x_aug,
                               const EvalContext& ctx) const {
  RngStream rng =
      RngStream(ctx.seed).substream("ssl-gumbel", static_cast<std::uint64_t>(ctx.iteration));
  return ssl_forward(params_, cfg_, graph.normalized_adjacency, graph.features, x_aug, rng);
}

double SslModel::loss(const AccumulatedGraph& graph, const EvalContext& ctx) const {
  const auto augmented = augmented_for(graph, ctx);
  const auto trace = forward_for(graph, augmented.features, ctx);
  return ssl_loss_masked(trace, graph.features, augmented.features, augmented.labels, cfg_.margin,
                         ctx.loss_nodes);
}

LossGrads SslModel::loss_and_grads(const AccumulatedGraph& graph, const EvalContext& ctx) const {
  const auto augmented = augmented_for(graph, ctx);
  const auto trace = forward_for(graph, augmented.features, ctx);
  auto grads = ssl_backward(params_, cfg_, graph.normalized_adjacency, graph.features,
                            augmented.features, trace, augmented.labels, cfg_.margin,
                            ctx.loss_nodes);
  LossGrads out;
  out.loss = ssl_loss_masked(trace, graph.features, augmented.features, augmented.labels,
                             cfg_.margin, ctx.loss_nodes);
  out.param_grads.push_back(std::move(grads.w1));
  out.param_grads.push_back(std::move(grads.w2));
  out.param_grads.push_back(std::move(grads.wg));
  out.param_grads.push_back(std::move(grads.v1));
  out.param_grads.push_back(std::move(grads.c1));
  out.param_grads.push_back(std::move(grads.v2));
  out.param_grads.push_back(std::move(grads.c2));
  out.feature_grad = std::move(grads.features);
  return out;
}

std::vector<DenseMatrix*> SslModel::tensors() {
  return {&params_.w1, &params_.w2, &params_.wg, &params_.v1, &params_.c1, &params_.v2,
          &params_.c2};
}

std::vector<const DenseMatrix*> SslModel::tensors() const {
  return {&params_.w1, &params_.w2, &params_.wg, &params_.v1, &params_.c1, &params_.v2,
          &params_.c2};
}

std::vector<std::string> SslModel::tensor_names() const {
  return {"enc_W1", "enc_W2", "latent_W", "dec_W1", "dec_b1", "dec_W2", "dec_b2"};
}

std::unique_ptr<Model> SslModel::clone() const { return std::make_unique<SslModel>(*this); }

std::optional<DenseMatrix> SslModel::class_probabilities(const AccumulatedGraph& graph,
                                                         const EvalContext& ctx) const {
  const auto scores = anomaly_scores(graph, ctx);
  DenseMatrix probs(scores.size(), 2);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p_anomalous = scores[i] / (1.0 + scores[i]);
    probs(i, 0) = 1.0 - p_anomalous;
    probs(i, 1) = p_anomalous;
  }
  return probs;
}

std::vector<double> SslModel::anomaly_scores(const AccumulatedGraph& graph,
                                             const EvalContext& ctx) const {
  RngStream rng =
      RngStream(ctx.seed).substream("ssl-score", static_cast<std::uint64_t>(ctx.iteration));
  return ssl_anomaly_score(params_, cfg_, graph.normalized_adjacency, graph.features, rng,
                           cfg_.score_samples);
}

}  // namespace wfal
