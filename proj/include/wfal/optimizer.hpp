#pragma once

#include <cstdint>
#include <vector>

#include "wfal/matrix.hpp"

namespace wfal {

struct TrainConfig {
  double learning_rate = 5e-4;
  double weight_decay = 1e-4;
  int batch_nodes = 32;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// First/second moment accumulators, one per parameter tensor, plus the step
// count shared by all of them.
struct AdamWState {
  std::vector<DenseMatrix> first_moment;
  std::vector<DenseMatrix> second_moment;
  std::int64_t step = 0;
};

AdamWState make_adamw_state(const std::vector<const DenseMatrix*>& params);

// One decoupled-weight-decay step:
//   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)
// with standard bias correction. Gradients are matched to params by position.
void adamw_step(AdamWState& state, const std::vector<DenseMatrix*>& params,
                const std::vector<DenseMatrix>& grads, const TrainConfig& cfg);

}  // namespace wfal
