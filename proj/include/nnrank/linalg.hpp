#pragma once

// Rank, determinants and small solves. Exact matrices use fraction-free
// (Bareiss) elimination over integers; float matrices use an SVD.

#include "nnrank/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace nnrank {

inline constexpr double kDefaultRankTol = 1e-9;
inline constexpr double kZeroMatrixFloor = 1e-300;

inline Eigen::MatrixXd to_eigen(const Matrix<double>& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline Matrix<double> from_eigen(const Eigen::MatrixXd& e) {
  Matrix<double> m(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

inline std::vector<double> singular_values(const Matrix<double>& m) {
  if (m.rows() == 0 || m.cols() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
  const auto& s = svd.singularValues();
  return std::vector<double>(s.data(), s.data() + s.size());
}

/// Count of singular values above tol * sigma_max; 0 for a numerically zero matrix.
inline std::size_t matrix_rank(const Matrix<double>& m, double tol = kDefaultRankTol) {
  if (!(tol > 0)) throw std::invalid_argument("float rank requires tol > 0");
  const auto s = singular_values(m);
  if (s.empty() || s.front() < kZeroMatrixFloor) return 0;
  std::size_t r = 0;
  for (double v : s)
    if (v > tol * s.front()) ++r;
  return r;
}

namespace detail {

/// Rows scaled by the lcm of their denominators, as integers.
inline std::vector<std::vector<mpz_class>> integer_rows(const Matrix<Rational>& m) {
  std::vector<std::vector<mpz_class>> rows(m.rows(), std::vector<mpz_class>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    mpz_class l = 1;
    for (std::size_t j = 0; j < m.cols(); ++j) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), m(i, j).get_den_mpz_t());
    for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j).get_num() * (l / m(i, j).get_den());
  }
  return rows;
}

/// Bareiss elimination in place; returns the rank and the sign of the row permutation.
inline std::size_t bareiss(std::vector<std::vector<mpz_class>>& a, std::size_t cols, int* perm_sign = nullptr) {
  const std::size_t rows = a.size();
  mpz_class prev = 1;
  std::size_t rank = 0;
  int sign = 1;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && a[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    if (piv != rank) {
      std::swap(a[piv], a[rank]);
      sign = -sign;
    }
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        a[i][j] = a[rank][c] * a[i][j] - a[i][c] * a[rank][j];
        mpz_divexact(a[i][j].get_mpz_t(), a[i][j].get_mpz_t(), prev.get_mpz_t());
      }
      a[i][c] = 0;
    }
    prev = a[rank][c];
    ++rank;
  }
  if (perm_sign) *perm_sign = sign;
  return rank;
}

}  // namespace detail

/// Exact rank; `tol` is accepted for interface symmetry and ignored.
inline std::size_t matrix_rank(const Matrix<Rational>& m, double /*tol*/ = kDefaultRankTol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  auto rows = detail::integer_rows(m);
  return detail::bareiss(rows, m.cols());
}

inline Rational determinant(const Matrix<Rational>& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant of a non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return Rational(1);
  // Work directly over the rationals: Gaussian elimination with exact pivots.
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = m(i, j);
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a[piv][c] == 0) ++piv;
    if (piv == n) return Rational(0);
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t i = c + 1; i < n; ++i) {
      if (a[i][c] == 0) continue;
      Rational f = a[i][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[i][j] -= f * a[c][j];
    }
  }
  return det;
}

inline double determinant(const Matrix<double>& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant of a non-square matrix");
  if (m.rows() == 0) return 1.0;
  return to_eigen(m).partialPivLu().determinant();
}

template <Scalar T>
T det2(const T& a, const T& b, const T& c, const T& d) {
  return a * d - b * c;
}

/// Inverse of a 2x2 matrix; throws when singular (exactly, or below tol relative in float mode).
template <Scalar T>
Matrix<T> inverse2(const Matrix<T>& m, double tol = kDefaultRankTol) {
  if (m.rows() != 2 || m.cols() != 2) throw std::invalid_argument("inverse2 expects a 2x2 matrix");
  T d = det2(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
  const double scale = m.max_abs() * m.max_abs();
  if (near_zero(d, tol, scale)) throw std::domain_error("singular 2x2 matrix");
  Matrix<T> inv(2, 2);
  inv(0, 0) = m(1, 1) / d;
  inv(0, 1) = -m(0, 1) / d;
  inv(1, 0) = -m(1, 0) / d;
  inv(1, 1) = m(0, 0) / d;
  return inv;
}

/// Relative determinant |det F| / ||F||_F^n for a square float matrix.
inline double relative_determinant(const Matrix<double>& m) {
  const double det = std::fabs(determinant(m));
  double fro = 0.0;
  for (double x : m.entries()) fro += x * x;
  fro = std::sqrt(fro);
  if (fro < kZeroMatrixFloor) return 0.0;
  return det / std::pow(fro, static_cast<double>(m.rows()));
}

}  // namespace nnrank
