#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace wfal {

// Row-major dense matrix of doubles. Deliberately minimal: the graphs this
// project trains on stay well under ~10^3 nodes, so naive kernels are fast
// enough and keep the backward passes easy to audit.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> values);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  void fill(double value);
  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// aT_b(a, b) = transpose(a) * b; a_bT(a, b) = a * transpose(b).
DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& m);

void add_in_place(DenseMatrix& target, const DenseMatrix& other);
void sub_in_place(DenseMatrix& target, const DenseMatrix& other);
void scale_in_place(DenseMatrix& target, double factor);
// target += alpha * other
void axpy(DenseMatrix& target, double alpha, const DenseMatrix& other);
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);

double frobenius_norm(const DenseMatrix& m);
double row_norm(const DenseMatrix& m, std::size_t row);
double max_abs(const DenseMatrix& m);
std::vector<double> column_sums(const DenseMatrix& m);

}  // namespace wfal
