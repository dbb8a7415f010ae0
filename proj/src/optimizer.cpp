#include "wfal/optimizer.hpp"

#include <cmath>

#include "wfal/error.hpp"

namespace wfal {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) raise(ErrorCode::config_invalid, "learning_rate must be > 0");
  if (weight_decay < 0.0) raise(ErrorCode::config_invalid, "weight_decay must be >= 0");
  if (batch_nodes < 1) raise(ErrorCode::config_invalid, "batch_nodes must be >= 1");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    raise(ErrorCode::config_invalid, "adam betas must lie in (0,1)");
  }
  if (!(epsilon > 0.0)) raise(ErrorCode::config_invalid, "adam epsilon must be > 0");
}

AdamWState make_adamw_state(const std::vector<const DenseMatrix*>& params) {
  AdamWState state;
  state.first_moment.reserve(params.size());
  state.second_moment.reserve(params.size());
  for (const DenseMatrix* p : params) {
    state.first_moment.emplace_back(p->rows(), p->cols());
    state.second_moment.emplace_back(p->rows(), p->cols());
  }
  return state;
}

void adamw_step(AdamWState& state, const std::vector<DenseMatrix*>& params,
                const std::vector<DenseMatrix>& grads, const TrainConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    raise(ErrorCode::shape_mismatch, "adamw_step: tensor count mismatch");
  }
  state.step += 1;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < params.size(); ++t) {
    DenseMatrix& theta = *params[t];
    const DenseMatrix& grad = grads[t];
    if (!theta.same_shape(grad) || !theta.same_shape(state.first_moment[t])) {
      raise(ErrorCode::shape_mismatch, "adamw_step: tensor shape mismatch");
    }
    auto& m = state.first_moment[t].data();
    auto& v = state.second_moment[t].data();
    auto& w = theta.data();
    const auto& g = grad.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      w[i] -= cfg.learning_rate * (m_hat / (std::sqrt(v_hat) + cfg.epsilon) +
                                   cfg.weight_decay * w[i]);
    }
  }
}

}  // namespace wfal
