#pragma once

#include "wfal/matrix.hpp"
#include "wfal/rng.hpp"

namespace wfal {

double relu(double x);
double sigmoid(double x);

DenseMatrix relu(const DenseMatrix& m);
// 1 where the entry is > 0, else 0. Used to gate gradients through relu.
DenseMatrix relu_gate(const DenseMatrix& pre_activation);

// Row-wise softmax with max subtraction; every row sums to 1 within 1e-12.
DenseMatrix softmax_rows(const DenseMatrix& m);

// Row-wise log(sum(exp(row))) with max subtraction.
std::vector<double> log_sum_exp_rows(const DenseMatrix& m);

// y_i = softmax((logits_i + g_i) / temperature), g drawn i.i.d. standard
// Gumbel from rng in row-major order. Deterministic given the stream state.
DenseMatrix gumbel_softmax_sample(const DenseMatrix& logits, double temperature, RngStream& rng);

// Same relaxation with the Gumbel noise supplied by the caller, so one noise
// draw can be shared between two forward paths.
DenseMatrix gumbel_softmax_with_noise(const DenseMatrix& logits, double temperature,
                                      const DenseMatrix& noise);

// Backward through softmax_rows: given y = softmax(u) and dL/dy, returns dL/du.
DenseMatrix softmax_rows_backward(const DenseMatrix& y, const DenseMatrix& dy);

}  // namespace wfal
