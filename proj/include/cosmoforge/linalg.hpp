#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cosmoforge {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const;
  double trace() const;
  double frobenius_norm() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Largest |a(i,j) - a(j,i)|.
double asymmetry(const Matrix& a);

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k pairs with values[k]
};

inline constexpr int kJacobiMaxSweeps = 100;

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Throws NotSymmetric
// when asymmetry exceeds `symmetry_tol` (scaled by max(1, max|a|)) and
// NoConvergence after kJacobiMaxSweeps sweeps.
SymmetricEigen eigen_symmetric(const Matrix& a, double symmetry_tol = 1e-8);

// Principal square root of a symmetric positive semidefinite matrix.
// Negative eigenvalues are clamped to zero; the result is exactly symmetric.
Matrix sqrtm_psd(const Matrix& a);

// Rebuilds V * diag(f(lambda)) * V^T.
Matrix reconstruct(const SymmetricEigen& eig, std::span<const double> values);

}  // namespace cosmoforge
