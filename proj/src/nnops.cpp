#include "wfal/nnops.hpp"

#include <algorithm>
#include <cmath>

#include "wfal/error.hpp"

namespace wfal {

double relu(double x) { return x > 0.0 ? x : 0.0; }

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

DenseMatrix relu(const DenseMatrix& m) {
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = relu(m.data()[i]);
  return out;
}

DenseMatrix relu_gate(const DenseMatrix& pre_activation) {
  DenseMatrix out(pre_activation.rows(), pre_activation.cols());
  for (std::size_t i = 0; i < pre_activation.size(); ++i) {
    out.data()[i] = pre_activation.data()[i] > 0.0 ? 1.0 : 0.0;
  }
  return out;
}

DenseMatrix softmax_rows(const DenseMatrix& m) {
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double row_max = -HUGE_VAL;
    for (std::size_t j = 0; j < m.cols(); ++j) row_max = std::max(row_max, m(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double e = std::exp(m(i, j) - row_max);
      out(i, j) = e;
      sum += e;
    }
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) /= sum;
  }
  return out;
}

std::vector<double> log_sum_exp_rows(const DenseMatrix& m) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double row_max = -HUGE_VAL;
    for (std::size_t j = 0; j < m.cols(); ++j) row_max = std::max(row_max, m(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) sum += std::exp(m(i, j) - row_max);
    out[i] = row_max + std::log(sum);
  }
  return out;
}

DenseMatrix gumbel_softmax_with_noise(const DenseMatrix& logits, double temperature,
                                      const DenseMatrix& noise) {
  if (temperature <= 0.0) {
    raise(ErrorCode::non_positive_temperature, "gumbel softmax needs temperature > 0");
  }
  if (!logits.same_shape(noise)) {
    raise(ErrorCode::shape_mismatch, "gumbel noise shape does not match logits");
  }
  DenseMatrix scaled(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    scaled.data()[i] = (logits.data()[i] + noise.data()[i]) / temperature;
  }
  return softmax_rows(scaled);
}

DenseMatrix gumbel_softmax_sample(const DenseMatrix& logits, double temperature, RngStream& rng) {
  if (temperature <= 0.0) {
    raise(ErrorCode::non_positive_temperature, "gumbel softmax needs temperature > 0");
  }
  DenseMatrix noise(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < noise.size(); ++i) noise.data()[i] = rng.gumbel();
  return gumbel_softmax_with_noise(logits, temperature, noise);
}

DenseMatrix softmax_rows_backward(const DenseMatrix& y, const DenseMatrix& dy) {
  if (!y.same_shape(dy)) raise(ErrorCode::shape_mismatch, "softmax backward shape mismatch");
  DenseMatrix du(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < y.cols(); ++j) dot += dy(i, j) * y(i, j);
    for (std::size_t j = 0; j < y.cols(); ++j) du(i, j) = y(i, j) * (dy(i, j) - dot);
  }
  return du;
}

}  // namespace wfal
