#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cltb {

/// Dense row-major matrix. Small (k x k) Gram-type matrices and k x n
/// direction blocks both live here.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const;
  friend Matrix operator*(const Matrix& a, const Matrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);

/// Largest entrywise |a - b|; matrices must have equal shape.
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column j is the eigenvector of values[j]
};

/// Eigen-decomposition of a symmetric matrix (Householder tridiagonalization
/// followed by implicit QL/QR iteration).
SymmetricEigen symmetric_eigen(const Matrix& a);

/// Symmetric square root of a positive semi-definite matrix. Eigenvalues in
/// [-tol, 0) are clamped to zero; anything more negative is rejected.
Matrix symmetric_sqrt(const Matrix& a, double tol = 1e-12);

}  // namespace cltb
