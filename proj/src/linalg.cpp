#include "cosmoforge/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cosmoforge/error.hpp"

namespace cosmoforge {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Matrix::trace() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) sum += (*this)(i, i);
  return sum;
}

double Matrix::frobenius_norm() const {
  double sum = 0.0;
  for (const double v : data_) sum += v * v;
  return std::sqrt(sum);
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix product shape mismatch");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix sum shape mismatch");
  }
  Matrix out = a;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix difference shape mismatch");
  }
  Matrix out = a;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
  return out;
}

double asymmetry(const Matrix& a) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
  return worst;
}

namespace {

inline void rotate_pair(Matrix& m, std::size_t i, std::size_t j, std::size_t k,
                        std::size_t l, double s, double tau) {
  const double g = m(i, j);
  const double h = m(k, l);
  m(i, j) = g - s * (h + g * tau);
  m(k, l) = h + s * (g - h * tau);
}

}  // namespace

SymmetricEigen eigen_symmetric(const Matrix& input, double symmetry_tol) {
  const std::size_t n = input.rows();
  if (input.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "eigendecomposition needs a square matrix");
  }
  double max_abs = 0.0;
  for (const double v : input.data()) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteFeature, "matrix has non-finite entries");
    }
    max_abs = std::max(max_abs, std::abs(v));
  }
  if (asymmetry(input) > symmetry_tol * std::max(1.0, max_abs)) {
    throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric");
  }

  // Works on the upper triangle only; the strict upper part is driven to zero
  // by plane rotations, the diagonal converges to the eigenvalues.
  Matrix a = input;
  Matrix v = Matrix::identity(n);
  std::vector<double> d(n);
  std::vector<double> b(n);
  std::vector<double> z(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) b[i] = d[i] = a(i, i);

  bool converged = n <= 1;
  for (int sweep = 1; sweep <= kJacobiMaxSweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::abs(a(p, q));
    if (off == 0.0) {
      converged = true;
      break;
    }
    // Early sweeps only rotate large elements.
    const double threshold =
        sweep < 4 ? 0.2 * off / static_cast<double>(n * n) : 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double g = 100.0 * std::abs(a(p, q));
        if (sweep > 4 && std::abs(d[p]) + g == std::abs(d[p]) &&
            std::abs(d[q]) + g == std::abs(d[q])) {
          a(p, q) = 0.0;
          continue;
        }
        if (std::abs(a(p, q)) <= threshold) continue;
        double h = d[q] - d[p];
        double t;
        if (std::abs(h) + g == std::abs(h)) {
          t = a(p, q) / h;
        } else {
          const double theta = 0.5 * h / a(p, q);
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        h = t * a(p, q);
        z[p] -= h;
        z[q] += h;
        d[p] -= h;
        d[q] += h;
        a(p, q) = 0.0;
        for (std::size_t j = 0; j < p; ++j) rotate_pair(a, j, p, j, q, s, tau);
        for (std::size_t j = p + 1; j < q; ++j) rotate_pair(a, p, j, j, q, s, tau);
        for (std::size_t j = q + 1; j < n; ++j) rotate_pair(a, p, j, q, j, s, tau);
        for (std::size_t j = 0; j < n; ++j) rotate_pair(v, j, p, j, q, s, tau);
      }
    }
    for (std::size_t p = 0; p < n; ++p) {
      b[p] += z[p];
      d[p] = b[p];
      z[p] = 0.0;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::NoConvergence,
                "Jacobi eigensolver did not converge in " +
                    std::to_string(kJacobiMaxSweeps) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return d[i] < d[j]; });
  SymmetricEigen eig{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    eig.values[k] = d[order[k]];
    for (std::size_t r = 0; r < n; ++r) eig.vectors(r, k) = v(r, order[k]);
  }
  return eig;
}

Matrix reconstruct(const SymmetricEigen& eig, std::span<const double> values) {
  const std::size_t n = eig.vectors.rows();
  Matrix scaled = eig.vectors;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n; ++k) scaled(r, k) *= values[k];
  Matrix out = scaled * eig.vectors.transposed();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double mean = 0.5 * (out(i, j) + out(j, i));
      out(i, j) = mean;
      out(j, i) = mean;
    }
  }
  return out;
}

Matrix sqrtm_psd(const Matrix& a) {
  const SymmetricEigen eig = eigen_symmetric(a);
  std::vector<double> roots(eig.values.size());
  std::transform(eig.values.begin(), eig.values.end(), roots.begin(),
                 [](double lambda) { return std::sqrt(std::max(lambda, 0.0)); });
  return reconstruct(eig, roots);
}

}  // namespace cosmoforge
