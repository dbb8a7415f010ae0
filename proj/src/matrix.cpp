#include "wfal/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wfal/error.hpp"

namespace wfal {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> values) {
  rows_ = values.size();
  cols_ = rows_ == 0 ? 0 : values.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : values) {
    if (row.size() != cols_) {
      raise(ErrorCode::dim_mismatch, "ragged initializer list");
    }
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void DenseMatrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool DenseMatrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

void require_shape(bool ok, const char* what) {
  if (!ok) raise(ErrorCode::dim_mismatch, what);
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.cols() == b.rows(), "matmul: a.cols != b.rows");
  DenseMatrix out(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        out(i, j) += aip * b(p, j);
      }
    }
  }
  return out;
}

DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.rows() == b.rows(), "matmul_at_b: a.rows != b.rows");
  DenseMatrix out(a.cols(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < k; ++i) {
      const double api = a(p, i);
      if (api == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        out(i, j) += api * b(p, j);
      }
    }
  }
  return out;
}

DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.cols() == b.cols(), "matmul_a_bt: a.cols != b.cols");
  DenseMatrix out(a.rows(), b.rows());
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a(i, p) * b(j, p);
      out(i, j) = acc;
    }
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  }
  return out;
}

void add_in_place(DenseMatrix& target, const DenseMatrix& other) {
  require_shape(target.same_shape(other), "add_in_place: shape mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) target.data()[i] += other.data()[i];
}

void sub_in_place(DenseMatrix& target, const DenseMatrix& other) {
  require_shape(target.same_shape(other), "sub_in_place: shape mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) target.data()[i] -= other.data()[i];
}

void scale_in_place(DenseMatrix& target, double factor) {
  for (double& v : target.data()) v *= factor;
}

void axpy(DenseMatrix& target, double alpha, const DenseMatrix& other) {
  require_shape(target.same_shape(other), "axpy: shape mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) target.data()[i] += alpha * other.data()[i];
}

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.same_shape(b), "hadamard: shape mismatch");
  DenseMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

double frobenius_norm(const DenseMatrix& m) {
  double acc = 0.0;
  for (double v : m.data()) acc += v * v;
  return std::sqrt(acc);
}

double row_norm(const DenseMatrix& m, std::size_t row) {
  double acc = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) acc += m(row, j) * m(row, j);
  return std::sqrt(acc);
}

double max_abs(const DenseMatrix& m) {
  double best = 0.0;
  for (double v : m.data()) best = std::max(best, std::abs(v));
  return best;
}

std::vector<double> column_sums(const DenseMatrix& m) {
  std::vector<double> sums(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) sums[j] += m(i, j);
  }
  return sums;
}

}  // namespace wfal
