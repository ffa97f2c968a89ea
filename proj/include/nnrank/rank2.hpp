#pragma once

// Nonnegative rank <= 2: decision, construction, boundary classification.
//
// A nonnegative tensor has nonnegative rank at most two exactly when it is
// supermodular and every flattening has rank at most two. The constructive
// direction runs in three stages:
//
//   1. axes whose flattening has rank one are split off as shared factors;
//   2. every remaining axis is compressed onto two pivot indices, giving a
//      2x...x2 core P0 with P = P0 * (C_1, ..., C_n) and C_r >= 0;
//   3. the core is flattened to 2x2xM and split by a rank-2 matrix pencil.

#include "nnrank/decomposition.hpp"
#include "nnrank/linalg.hpp"
#include "nnrank/supermodular.hpp"
#include "nnrank/tensor_ops.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nnrank {

/// Thrown when the input is not in the model (or the construction cannot certify it).
class NotInModel : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown by exact-mode construction when the pencil roots are irrational.
class IrrationalFactors : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DecomposeOptions {
  double rank_tol = kDefaultRankTol;
  /// Maximal accepted relative reconstruction error (float mode).
  double recon_tol = 1e-8;
  /// Factor entries in (-neg_tol * max, 0) are clamped to zero (float mode).
  double neg_tol = 1e-9;
  /// U12*U13*U23 / p+++^6 at or below this routes 2x2x2 inputs to the rank-one-flattening branch.
  double u_tol = 1e-12;
};

// ---------------------------------------------------------------- 2x2x2 invariants

template <Scalar T>
struct UQuantities {
  T u12, u13, u23;
  T u12_1, u12_2, u13_1, u13_2, u23_1, u23_2;
};

namespace detail {

template <Scalar T>
void require_222(const Tensor<T>& p) {
  if (!(p.shape() == Shape{2, 2, 2})) throw std::invalid_argument("expected a 2x2x2 tensor, got " + p.shape().to_string());
}

// p(i,j,k) with 1-based indices on a 2x2x2 tensor.
template <Scalar T>
const T& e(const Tensor<T>& p, int i, int j, int k) {
  return p[static_cast<std::size_t>((i - 1) * 4 + (j - 1) * 2 + (k - 1))];
}

}  // namespace detail

template <Scalar T>
UQuantities<T> u_quantities(const Tensor<T>& p) {
  detail::require_222(p);
  auto x = [&](int i, int j, int k) -> const T& { return detail::e(p, i, j, k); };
  auto m12 = [&](int i, int j) { return T(x(i, j, 1) + x(i, j, 2)); };
  auto m13 = [&](int i, int k) { return T(x(i, 1, k) + x(i, 2, k)); };
  auto m23 = [&](int j, int k) { return T(x(1, j, k) + x(2, j, k)); };
  UQuantities<T> u;
  u.u12 = m12(1, 1) * m12(2, 2) - m12(1, 2) * m12(2, 1);
  u.u13 = m13(1, 1) * m13(2, 2) - m13(1, 2) * m13(2, 1);
  u.u23 = m23(1, 1) * m23(2, 2) - m23(1, 2) * m23(2, 1);
  u.u12_1 = x(1, 1, 1) * x(2, 2, 1) - x(1, 2, 1) * x(2, 1, 1);
  u.u12_2 = x(1, 1, 2) * x(2, 2, 2) - x(1, 2, 2) * x(2, 1, 2);
  u.u13_1 = x(1, 1, 1) * x(2, 1, 2) - x(1, 1, 2) * x(2, 1, 1);
  u.u13_2 = x(1, 2, 1) * x(2, 2, 2) - x(1, 2, 2) * x(2, 2, 1);
  u.u23_1 = x(1, 1, 1) * x(1, 2, 2) - x(1, 1, 2) * x(1, 2, 1);
  u.u23_2 = x(2, 1, 1) * x(2, 2, 2) - x(2, 1, 2) * x(2, 2, 1);
  return u;
}

/// Remainder R in U12 = U12^1 + U12^2 + R.
template <Scalar T>
T u12_remainder(const Tensor<T>& p) {
  detail::require_222(p);
  auto x = [&](int i, int j, int k) -> const T& { return detail::e(p, i, j, k); };
  return x(1, 1, 1) * x(2, 2, 2) + x(2, 2, 1) * x(1, 1, 2) - x(2, 1, 1) * x(1, 2, 2) - x(1, 2, 1) * x(2, 1, 2);
}

/// Cayley's hyperdeterminant of a 2x2x2 tensor.
template <Scalar T>
T hyperdeterminant(const Tensor<T>& p) {
  detail::require_222(p);
  auto x = [&](int i, int j, int k) -> const T& { return detail::e(p, i, j, k); };
  const T &p111 = x(1, 1, 1), &p112 = x(1, 1, 2), &p121 = x(1, 2, 1), &p122 = x(1, 2, 2);
  const T &p211 = x(2, 1, 1), &p212 = x(2, 1, 2), &p221 = x(2, 2, 1), &p222 = x(2, 2, 2);
  T d = 4 * p111 * p122 * p212 * p221 + 4 * p112 * p121 * p211 * p222;
  d += p111 * p111 * p222 * p222 + p122 * p122 * p211 * p211;
  d += p112 * p112 * p221 * p221 + p121 * p121 * p212 * p212;
  d -= 2 * p111 * p112 * p221 * p222 + 2 * p111 * p121 * p212 * p222;
  d -= 2 * p111 * p122 * p211 * p222 + 2 * p112 * p121 * p212 * p221;
  d -= 2 * p112 * p122 * p211 * p221 + 2 * p121 * p122 * p211 * p212;
  return d;
}

/// mu with p+++^2 Det(P) = mu^2 + 4 U12 U13 U23.
template <Scalar T>
T mu(const Tensor<T>& p) {
  detail::require_222(p);
  auto x = [&](int i, int j, int k) -> const T& { return detail::e(p, i, j, k); };
  const T total = p.sum();
  T p2__(0), p_2_(0), p__2(0);
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b) {
      p2__ += x(2, a, b);
      p_2_ += x(a, 2, b);
      p__2 += x(a, b, 2);
    }
  const T p_22 = x(1, 2, 2) + x(2, 2, 2);
  const T p2_2 = x(2, 1, 2) + x(2, 2, 2);
  const T p22_ = x(2, 2, 1) + x(2, 2, 2);
  return total * total * x(2, 2, 2) - total * (p2__ * p_22 + p_2_ * p2_2 + p__2 * p22_) + 2 * p2__ * p_2_ * p__2;
}

// ---------------------------------------------------------------- helpers

namespace detail {

template <Scalar T>
T vec_sum(const std::vector<T>& v) {
  T acc(0);
  for (const auto& x : v) acc += x;
  return acc;
}

template <Scalar T>
std::vector<T> normalized(std::vector<T> v) {
  const T s = vec_sum(v);
  if (s == 0) throw NotInModel("factor vector has zero coordinate sum");
  for (auto& x : v) x /= s;
  return v;
}

template <Scalar T>
std::vector<T> uniform(std::size_t d) {
  return std::vector<T>(d, T(1) / T(static_cast<long>(d)));
}

template <Scalar T>
T cross2(const T& u0, const T& u1, const T& v0, const T& v1) {
  return u0 * v1 - u1 * v0;
}

template <Scalar T>
Rank2Decomposition<T> rank_one(const Shape& shape, std::vector<std::vector<T>> factors, const T& weight) {
  Rank2Decomposition<T> d;
  d.shape = shape;
  d.a = std::move(factors);
  d.b = d.a;
  d.s = weight;
  d.t = T(0);
  return d;
}

template <Scalar T>
Rank2Decomposition<T> zero_decomposition(const Shape& shape) {
  Rank2Decomposition<T> d;
  d.shape = shape;
  for (auto dim : shape.dims()) d.a.push_back(uniform<T>(dim));
  d.b = d.a;
  return d;
}

}  // namespace detail

// ---------------------------------------------------------------- matrices

template <Scalar T>
T vec_sum_all(const Matrix<T>& m) {
  return detail::vec_sum(m.entries());
}

inline const Matrix<double>& to_double_matrix(const Matrix<double>& m) { return m; }
inline Matrix<double> to_double_matrix(const Matrix<Rational>& m) { return to_double(m); }

/// M = s a1 a2^T + t b1 b2^T with nonnegative parts, for a nonnegative matrix of rank <= 2.
template <Scalar T>
Rank2Decomposition<T> nonneg_matrix_rank2(const Matrix<T>& m, double tol = kDefaultRankTol) {
  for (const auto& x : m.entries())
    if (x < 0) throw std::domain_error("matrix has a negative entry");
  const Shape shape{m.rows(), m.cols()};
  const auto rank = matrix_rank(m, tol);
  if (rank > 2) throw NotInModel("matrix rank " + std::to_string(rank) + " exceeds 2");
  const T total = vec_sum_all(m);
  if (rank == 0 || total == 0) return detail::zero_decomposition<T>(shape);

  std::vector<T> colsum(m.cols(), T(0));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) colsum[j] += m(i, j);

  if (rank == 1) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < m.cols(); ++j)
      if (colsum[j] > colsum[best]) best = j;
    return detail::rank_one<T>(shape, {detail::normalized(m.col(best)), detail::normalized(colsum)}, total);
  }

  // Two rows that see the whole column space.
  std::size_t r1 = 0, r2 = 1;
  if constexpr (is_exact_v<T>) {
    bool found = false;
    for (std::size_t i = 0; i < m.rows() && !found; ++i)
      for (std::size_t k = i + 1; k < m.rows() && !found; ++k) {
        Matrix<T> sub(2, m.cols());
        for (std::size_t j = 0; j < m.cols(); ++j) {
          sub(0, j) = m(i, j);
          sub(1, j) = m(k, j);
        }
        if (matrix_rank(sub) == 2) {
          r1 = i;
          r2 = k;
          found = true;
        }
      }
  } else {
    double best = -1.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t k = i + 1; k < m.rows(); ++k) {
        double aa = 0, bb = 0, ab = 0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
          aa += m(i, j) * m(i, j);
          bb += m(k, j) * m(k, j);
          ab += m(i, j) * m(k, j);
        }
        if (aa * bb - ab * ab > best) {
          best = aa * bb - ab * ab;
          r1 = i;
          r2 = k;
        }
      }
  }

  // Extreme rays of the planar cone spanned by the projected columns.
  double max_l1 = 0;
  for (std::size_t j = 0; j < m.cols(); ++j) max_l1 = std::max(max_l1, to_double(m(r1, j) + m(r2, j)));
  auto negligible = [&](std::size_t j) {
    if constexpr (is_exact_v<T>) {
      return m(r1, j) == 0 && m(r2, j) == 0;
    } else {
      return m(r1, j) + m(r2, j) <= 1e-12 * max_l1;
    }
  };
  std::optional<std::size_t> g1, g2;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (negligible(j)) continue;
    if (!g1 || detail::cross2(m(r1, *g1), m(r2, *g1), m(r1, j), m(r2, j)) < 0) g1 = j;
    if (!g2 || detail::cross2(m(r1, *g2), m(r2, *g2), m(r1, j), m(r2, j)) > 0) g2 = j;
  }
  const T det = detail::cross2(m(r1, *g1), m(r2, *g1), m(r1, *g2), m(r2, *g2));
  if (!(det > 0)) throw NotInModel("could not find two independent generating columns");

  std::vector<T> lambda(m.cols()), mu_(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    lambda[j] = detail::cross2(m(r1, j), m(r2, j), m(r1, *g2), m(r2, *g2)) / det;
    mu_[j] = detail::cross2(m(r1, *g1), m(r2, *g1), m(r1, j), m(r2, j)) / det;
    if constexpr (!is_exact_v<T>) {
      lambda[j] = std::max(lambda[j], 0.0);
      mu_[j] = std::max(mu_[j], 0.0);
    }
  }
  const auto c1 = m.col(*g1), c2 = m.col(*g2);
  Rank2Decomposition<T> d;
  d.shape = shape;
  d.s = detail::vec_sum(c1) * detail::vec_sum(lambda);
  d.t = detail::vec_sum(c2) * detail::vec_sum(mu_);
  d.a = {detail::normalized(c1), detail::normalized(lambda)};
  d.b = {detail::normalized(c2), detail::normalized(mu_)};
  return d;
}

// ---------------------------------------------------------------- compression

template <Scalar T>
struct Compression {
  /// 2x...x2 core: P restricted on every axis to its two pivots.
  Tensor<T> core;
  /// Nonnegative 2 x d_r matrices with P = core * (C_1, ..., C_n).
  std::vector<Matrix<T>> c;
  /// Per axis, the two pivot indices (1-based) in core order.
  std::vector<std::array<std::size_t, 2>> pivots;
  /// Per axis, the pivots followed by the remaining indices (1-based).
  std::vector<std::vector<std::size_t>> permutations;
};

namespace detail {

/// Columns j1 < j2 of F spanning its (two-dimensional) column space.
template <Scalar T>
std::pair<std::size_t, std::size_t> spanning_columns(const Matrix<T>& f) {
  if constexpr (is_exact_v<T>) {
    for (std::size_t j1 = 0; j1 < f.cols(); ++j1)
      for (std::size_t j2 = j1 + 1; j2 < f.cols(); ++j2) {
        Matrix<T> pair(f.rows(), 2);
        for (std::size_t i = 0; i < f.rows(); ++i) {
          pair(i, 0) = f(i, j1);
          pair(i, 1) = f(i, j2);
        }
        if (matrix_rank(pair) == 2) return {j1, j2};
      }
  } else {
    // maximal Gram determinant, i.e. the largest sum of squared 2x2 minors
    std::vector<double> norm2(f.cols(), 0.0);
    for (std::size_t j = 0; j < f.cols(); ++j)
      for (std::size_t i = 0; i < f.rows(); ++i) norm2[j] += f(i, j) * f(i, j);
    double best = -1;
    std::pair<std::size_t, std::size_t> arg{0, 1};
    for (std::size_t j1 = 0; j1 < f.cols(); ++j1)
      for (std::size_t j2 = j1 + 1; j2 < f.cols(); ++j2) {
        double dot = 0;
        for (std::size_t i = 0; i < f.rows(); ++i) dot += f(i, j1) * f(i, j2);
        const double g = norm2[j1] * norm2[j2] - dot * dot;
        if (g > best) {
          best = g;
          arg = {j1, j2};
        }
      }
    if (best > 0) return arg;
  }
  throw std::domain_error("axis flattening has rank below 2");
}

/// Smallest ratio num_k / den_k over den_k > threshold, with its index.
template <Scalar T>
std::pair<T, std::size_t> min_ratio(const std::vector<T>& num, const std::vector<T>& den, double threshold) {
  std::optional<std::size_t> arg;
  T best(0);
  for (std::size_t k = 0; k < den.size(); ++k) {
    if (!(to_double(den[k]) > threshold) || !(den[k] > 0)) continue;
    T r = num[k] / den[k];
    if (!arg || r < best) {
      best = r;
      arg = k;
    }
  }
  if (!arg) throw std::domain_error("degenerate spanning pair");
  return {best, *arg};
}

template <Scalar T>
double max_of(const std::vector<T>& v) {
  double m = 0;
  for (const auto& x : v) m = std::max(m, std::fabs(to_double(x)));
  return m;
}

}  // namespace detail

/// P = P0 * (C_1, ..., C_n) with a 2x...x2 core; every axis flattening must have rank exactly 2.
template <Scalar T>
Compression<T> compress_to_binary(const Tensor<T>& p, double tol = kDefaultRankTol) {
  if (!p.is_nonnegative()) throw std::domain_error("tensor has a negative entry");
  Compression<T> out;
  Tensor<T> core = p;
  for (std::size_t r = 1; r <= p.order(); ++r) {
    const auto f = axis_flattening(p, r);
    const auto rank = matrix_rank(f, tol);
    if (rank != 2)
      throw std::domain_error("axis " + std::to_string(r) + " flattening has rank " + std::to_string(rank) + ", need 2");
    const auto [j1, j2] = detail::spanning_columns(f);
    const auto a = f.col(j1), b = f.col(j2);
    const double eps = is_exact_v<T> ? 0.0 : 1e-12;

    // a'' = a - t b, zero at k1
    auto [tq, k1] = detail::min_ratio(a, b, eps * detail::max_of(b));
    std::vector<T> a2(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      a2[k] = a[k] - tq * b[k];
      if (a2[k] < 0) a2[k] = 0;
    }
    a2[k1] = 0;
    // b'' = b - s a'', zero at k2
    auto [sq, k2] = detail::min_ratio(b, a2, eps * detail::max_of(a2));
    std::vector<T> b2(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) {
      b2[k] = b[k] - sq * a2[k];
      if (b2[k] < 0) b2[k] = 0;
    }
    b2[k2] = 0;

    Matrix<T> c(2, p.shape()[r - 1]);
    for (std::size_t k = 0; k < a.size(); ++k) {
      c(0, k) = a2[k] / a2[k2];
      c(1, k) = b2[k] / b2[k1];
    }
    out.c.push_back(std::move(c));
    out.pivots.push_back({k2 + 1, k1 + 1});
    std::vector<std::size_t> perm{k2 + 1, k1 + 1};
    for (std::size_t k = 1; k <= a.size(); ++k)
      if (k != k1 + 1 && k != k2 + 1) perm.push_back(k);
    out.permutations.push_back(std::move(perm));
    core = detail::restrict_axis(core, r - 1, {k2, k1}, false);
  }
  out.core = std::move(core);
  return out;
}

// ---------------------------------------------------------------- pencil core

namespace detail {

template <Scalar T>
struct PencilSplit {
  // columns of A1, A2 (unit sum) and third-axis weights for the two terms
  std::array<std::vector<T>, 2> x, y;
  std::vector<T> alpha, beta;
};

template <Scalar T>
Matrix<T> matrix_slice(const Tensor<T>& p3, std::size_t k) {
  Matrix<T> s(2, 2);
  const std::size_t m = p3.shape()[2];
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) s(i, j) = p3[(i * 2 + j) * m + k];
  return s;
}

template <Scalar T>
T l1(const Matrix<T>& m) {
  T acc(0);
  for (const auto& x : m.entries()) acc += abs_value(x);
  return acc;
}

/// Roots of a nu^2 - b nu + c, distinct and real.
template <Scalar T>
std::array<T, 2> pencil_roots(const T& a, const T& b, const T& c) {
  const T disc = b * b - 4 * a * c;
  if constexpr (is_exact_v<T>) {
    if (disc <= 0) throw NotInModel("pencil has no two distinct real roots");
    auto root = exact_sqrt(disc);
    if (!root) throw IrrationalFactors("pencil roots are irrational");
    return {(b - *root) / (2 * a), (b + *root) / (2 * a)};
  } else {
    const double scale = b * b + std::fabs(4 * a * c);
    if (disc <= 1e-14 * scale) throw NotInModel("pencil has no two distinct real roots");
    const double q = 0.5 * (b + std::copysign(std::sqrt(disc), b));
    return {c / q, q / a};
  }
}

template <Scalar T>
std::pair<std::vector<T>, std::vector<T>> rank_one_factors(const Matrix<T>& r) {
  std::size_t bc = 0, br = 0;
  T best_c(-1), best_r(-1);
  for (std::size_t j = 0; j < 2; ++j) {
    T s = abs_value(r(0, j)) + abs_value(r(1, j));
    if (s > best_c) {
      best_c = s;
      bc = j;
    }
  }
  for (std::size_t i = 0; i < 2; ++i) {
    T s = abs_value(r(i, 0)) + abs_value(r(i, 1));
    if (s > best_r) {
      best_r = s;
      br = i;
    }
  }
  return {normalized(r.col(bc)), normalized(r.row(br))};
}

/// Splits a 2x2xM tensor of real rank 2 by the pencil det(T - nu S).
template <Scalar T>
PencilSplit<T> pencil_split(const Tensor<T>& p3) {
  const std::size_t m = p3.shape()[2];
  std::vector<Matrix<T>> slices;
  Matrix<T> s(2, 2);
  for (std::size_t k = 0; k < m; ++k) {
    slices.push_back(matrix_slice(p3, k));
    for (std::size_t i = 0; i < 4; ++i) s(i / 2, i % 2) += slices.back()(i / 2, i % 2);
  }
  const T s_l1 = l1(s);
  std::size_t kt = 0;
  T best(-1);
  for (std::size_t k = 0; k < m; ++k) {
    const T sk = l1(slices[k]);
    T score(0);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) score += abs_value(s(i, j) * sk - slices[k](i, j) * s_l1);
    if (score > best) {
      best = score;
      kt = k;
    }
  }
  const Matrix<T>& t = slices[kt];
  const T det_s = det2(s(0, 0), s(0, 1), s(1, 0), s(1, 1));
  const T det_t = det2(t(0, 0), t(0, 1), t(1, 0), t(1, 1));
  const T lin = t(0, 0) * s(1, 1) + t(1, 1) * s(0, 0) - t(0, 1) * s(1, 0) - t(1, 0) * s(0, 1);
  if (near_zero(det_s, 1e-14, s.max_abs() * s.max_abs())) throw NotInModel("slice sum is singular");
  const auto nu = pencil_roots(det_s, lin, det_t);

  PencilSplit<T> out;
  for (int r = 0; r < 2; ++r) {
    Matrix<T> res(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) res(i, j) = t(i, j) - nu[r] * s(i, j);
    auto [col, row] = rank_one_factors(res);
    out.x[r] = std::move(col);
    out.y[r] = std::move(row);
  }
  Matrix<T> a1{{out.x[0][0], out.x[1][0]}, {out.x[0][1], out.x[1][1]}};
  Matrix<T> a2{{out.y[0][0], out.y[1][0]}, {out.y[0][1], out.y[1][1]}};
  const auto a1i = inverse2(a1, 1e-12);
  const auto a2it = inverse2(a2, 1e-12).transposed();
  for (const auto& sk : slices) {
    const auto dk = a1i * sk * a2it;
    out.alpha.push_back(dk(0, 0));
    out.beta.push_back(dk(1, 1));
  }
  return out;
}

/// Unit-sum factors of a rank-one tensor given as a flat vector over a 2x...x2 shape.
template <Scalar T>
std::vector<std::vector<T>> rank_one_binary(const std::vector<T>& flat, std::size_t order) {
  Tensor<T> n(Shape(std::vector<std::size_t>(order, 2)), flat);
  const T total = n.sum();
  if (!(total > 0)) throw NotInModel("non-positive mixture weight");
  std::vector<std::vector<T>> out;
  for (std::size_t r = 1; r <= order; ++r) {
    auto v = axis_marginal(n, r);
    for (auto& x : v) x /= total;
    out.push_back(std::move(v));
  }
  return out;
}

/// Decomposition of a tensor all of whose axis flattenings have rank 2 (order >= 3).
template <Scalar T>
Rank2Decomposition<T> decompose_full_rank(const Tensor<T>& q, const DecomposeOptions& opt) {
  const auto comp = compress_to_binary(q, opt.rank_tol);
  const std::size_t m = q.order();
  Partition blocks{{1}, {2}, {}};
  for (std::size_t r = 3; r <= m; ++r) blocks[2].push_back(r);
  const auto p3 = flatten(comp.core, blocks);
  const auto split = pencil_split(p3);

  std::vector<std::vector<T>> a0{split.x[0], split.y[0]}, b0{split.x[1], split.y[1]};
  const auto na = rank_one_binary(split.alpha, m - 2);
  const auto nb = rank_one_binary(split.beta, m - 2);
  a0.insert(a0.end(), na.begin(), na.end());
  b0.insert(b0.end(), nb.begin(), nb.end());

  Rank2Decomposition<T> d;
  d.shape = q.shape();
  d.s = vec_sum(split.alpha);
  d.t = vec_sum(split.beta);
  for (std::size_t r = 0; r < m; ++r) {
    const auto& c = comp.c[r];
    std::vector<T> a(c.cols()), b(c.cols());
    for (std::size_t k = 0; k < c.cols(); ++k) {
      a[k] = a0[r][0] * c(0, k) + a0[r][1] * c(1, k);
      b[k] = b0[r][0] * c(0, k) + b0[r][1] * c(1, k);
    }
    const T sa = vec_sum(a), sb = vec_sum(b);
    if (sa == 0 || sb == 0) throw NotInModel("lifted factor has zero coordinate sum");
    d.s *= sa;
    d.t *= sb;
    for (auto& x : a) x /= sa;
    for (auto& x : b) x /= sb;
    d.a.push_back(std::move(a));
    d.b.push_back(std::move(b));
  }
  return d;
}

/// Clamps tiny negatives, rejects real ones, then checks the reconstruction.
template <Scalar T>
void certify(const Tensor<T>& p, Rank2Decomposition<T>& d, const DecomposeOptions& opt) {
  if constexpr (is_exact_v<T>) {
    for (const auto* vs : {&d.a, &d.b})
      for (const auto& v : *vs)
        for (const auto& x : v)
          if (x < 0) throw NotInModel("factor vector has a negative entry");
    if (d.s < 0 || d.t < 0) throw NotInModel("negative mixture weight");
    if (!(tensor_from_rank2(d) == p)) throw NotInModel("exact reconstruction failed");
  } else {
    for (auto* vs : {&d.a, &d.b})
      for (auto& v : *vs) {
        const double scale = max_of(v);
        bool clamped = false;
        for (auto& x : v) {
          if (x >= 0) continue;
          if (x < -opt.neg_tol * scale) throw NotInModel("factor vector has a negative entry");
          x = 0;
          clamped = true;
        }
        if (clamped) v = normalized(v);
      }
    const double wscale = std::max(std::fabs(d.s), std::fabs(d.t));
    for (auto* w : {&d.s, &d.t}) {
      if (*w >= 0) continue;
      if (*w < -opt.neg_tol * wscale) throw NotInModel("negative mixture weight");
      *w = 0;
    }
    const double err = relative_error(p, tensor_from_rank2(d));
    if (!(err <= opt.recon_tol))
      throw NotInModel("reconstruction error " + std::to_string(err) + " exceeds tolerance");
  }
}

}  // namespace detail

// ---------------------------------------------------------------- general decomposition

/// Nonnegative rank-2 decomposition of an in-model tensor. Throws NotInModel
/// when no certified decomposition exists, IrrationalFactors in exact mode
/// when the factors are not rational.
template <Scalar T>
Rank2Decomposition<T> decompose(const Tensor<T>& p, const DecomposeOptions& opt = {}) {
  if (!p.is_nonnegative()) throw std::domain_error("tensor has a negative entry");
  const std::size_t n = p.order();
  if (n == 0) throw std::invalid_argument("tensor must have at least one axis");
  if (p.is_zero()) return detail::zero_decomposition<T>(p.shape());

  std::vector<std::size_t> split_axes, free_axes;
  for (std::size_t r = 1; r <= n; ++r) {
    const auto rk = matrix_rank(axis_flattening(p, r), opt.rank_tol);
    if (rk > 2) throw NotInModel("axis " + std::to_string(r) + " flattening has rank " + std::to_string(rk));
    (rk <= 1 ? split_axes : free_axes).push_back(r);
  }

  Tensor<T> q = p;
  for (auto it = split_axes.rbegin(); it != split_axes.rend(); ++it) q = marginalize(q, *it);

  Rank2Decomposition<T> reduced;
  switch (free_axes.size()) {
    case 0:
      reduced = detail::rank_one<T>(Shape{}, {}, q[0]);
      break;
    case 1:
      throw std::logic_error("a single axis cannot carry rank 2");
    case 2:
      reduced = nonneg_matrix_rank2(as_matrix(q), opt.rank_tol);
      break;
    default:
      try {
        reduced = detail::decompose_full_rank(q, opt);
      } catch (const NotInModel&) {
        throw;
      } catch (const std::domain_error& e) {
        throw NotInModel(e.what());
      }
  }

  Rank2Decomposition<T> d;
  d.shape = p.shape();
  d.s = reduced.s;
  d.t = reduced.t;
  d.a.resize(n);
  d.b.resize(n);
  const T total = p.sum();
  for (auto r : split_axes) {
    auto v = axis_marginal(p, r);
    for (auto& x : v) x /= total;
    d.a[r - 1] = v;
    d.b[r - 1] = std::move(v);
  }
  for (std::size_t k = 0; k < free_axes.size(); ++k) {
    d.a[free_axes[k] - 1] = reduced.a[k];
    d.b[free_axes[k] - 1] = reduced.b[k];
  }
  detail::certify(p, d, opt);
  return d;
}

/// 2x2x2 construction following the sign of U12*U13*U23.
template <Scalar T>
Rank2Decomposition<T> decompose_222(const Tensor<T>& p, const DecomposeOptions& opt = {}) {
  detail::require_222(p);
  if (!p.is_nonnegative()) throw std::domain_error("tensor has a negative entry");
  if (p.is_zero()) return detail::zero_decomposition<T>(p.shape());
  SupermodularOptions sopt;
  if (!find_pi(p, sopt)) throw NotInModel("tensor is not supermodular");

  const auto u = u_quantities(p);
  const T prod = u.u12 * u.u13 * u.u23;
  const double total = to_double(p.sum());
  const bool positive_branch = is_exact_v<T> ? prod > 0 : to_double(prod) > opt.u_tol * std::pow(total, 6);

  Rank2Decomposition<T> d;
  if (positive_branch) {
    auto split = detail::pencil_split(p);
    d.shape = p.shape();
    d.s = detail::vec_sum(split.alpha);
    d.t = detail::vec_sum(split.beta);
    if (d.s == 0 || d.t == 0) throw NotInModel("degenerate mixture weight");
    d.a = {split.x[0], split.y[0], detail::normalized(split.alpha)};
    d.b = {split.x[1], split.y[1], detail::normalized(split.beta)};
  } else {
    // some axis flattening has rank one: P = v (x) P'
    std::size_t axis = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 1; r <= 3; ++r) {
      const auto sv = singular_values(to_double_matrix(axis_flattening(p, r)));
      const double ratio = sv.size() < 2 || sv[0] == 0 ? 0.0 : sv[1] / sv[0];
      if (ratio < best) {
        best = ratio;
        axis = r;
      }
    }
    auto v = axis_marginal(p, axis);
    for (auto& x : v) x /= p.sum();
    const auto m = nonneg_matrix_rank2(as_matrix(marginalize(p, axis)), opt.rank_tol);
    d.shape = p.shape();
    d.s = m.s;
    d.t = m.t;
    std::size_t k = 0;
    for (std::size_t r = 1; r <= 3; ++r) {
      if (r == axis) {
        d.a.push_back(v);
        d.b.push_back(v);
      } else {
        d.a.push_back(m.a[k]);
        d.b.push_back(m.b[k]);
        ++k;
      }
    }
  }
  detail::certify(p, d, opt);
  return d;
}

// ---------------------------------------------------------------- decision

enum class DecisionReason { pass, flattening_rank_exceeds_2, not_supermodular };

inline std::string_view to_string(DecisionReason r) {
  switch (r) {
    case DecisionReason::pass:
      return "pass";
    case DecisionReason::flattening_rank_exceeds_2:
      return "flattening-rank-exceeds-2";
    case DecisionReason::not_supermodular:
      return "not-supermodular";
  }
  return "unknown";
}

struct DecisionResult {
  bool in_model = false;
  DecisionReason reason = DecisionReason::pass;
  std::size_t flattening_rank = 0;
  /// Row block of the flattening attaining the maximal rank.
  std::vector<std::size_t> rank_witness;
  /// Supermodularity certificate on pass.
  std::optional<PermutationTuple> pi;
  /// A violated inequality under the identity tuple when not supermodular.
  std::optional<ViolationWitness> violation;
};

struct DecideOptions {
  double rank_tol = kDefaultRankTol;
  SupermodularOptions super;
};

/// In the model iff flattening rank <= 2 and supermodular.
template <Scalar T>
DecisionResult decide(const Tensor<T>& p, const DecideOptions& opt = {}) {
  if (!p.is_nonnegative()) throw std::domain_error("tensor has a negative entry");
  if (p.order() == 0) throw std::invalid_argument("tensor must have at least one axis");
  DecisionResult res;
  if (p.order() == 1) {
    res.in_model = true;
    res.flattening_rank = p.is_zero() ? 0 : 1;
    res.rank_witness = {1};
    res.pi = PermutationTuple::identity(p.shape());
    return res;
  }
  const auto fr = flattening_rank_with_witness(p, opt.rank_tol);
  res.flattening_rank = fr.rank;
  res.rank_witness = fr.witness;
  if (fr.rank > 2) {
    res.reason = DecisionReason::flattening_rank_exceeds_2;
    return res;
  }
  if (p.order() == 2) {
    // every nonnegative matrix of rank <= 2 has nonnegative rank <= 2
    res.in_model = true;
    try {
      res.pi = find_pi(p, opt.super);
    } catch (const SearchTooLarge&) {
    }
    return res;
  }
  res.pi = find_pi(p, opt.super);
  if (!res.pi) {
    res.reason = DecisionReason::not_supermodular;
    res.violation = is_pi_supermodular(p, PermutationTuple::identity(p.shape()), opt.super).witness;
    return res;
  }
  res.in_model = true;
  return res;
}

// ---------------------------------------------------------------- boundary

struct BoundaryComponent {
  enum class Kind { slice_rank_one, double_slice_dependent };
  Kind kind = Kind::slice_rank_one;
  std::size_t axis = 0;
  /// slice index (slice_rank_one) or first index (double_slice_dependent)
  std::size_t i = 0;
  /// second index (double_slice_dependent only)
  std::size_t j = 0;

  static BoundaryComponent slice(std::size_t axis, std::size_t index) {
    return {Kind::slice_rank_one, axis, index, 0};
  }
  static BoundaryComponent double_slice(std::size_t axis, std::size_t i, std::size_t j) {
    return {Kind::double_slice_dependent, axis, i, j};
  }
  friend bool operator==(const BoundaryComponent&, const BoundaryComponent&) = default;
};

/// Boundary components met by P. Slice components need order >= 3; double
/// slices are never reported for the 2x2x2 format.
template <Scalar T>
std::vector<BoundaryComponent> classify_boundary(const Tensor<T>& p, double tol = 1e-7,
                                                 bool include_double_slices = false) {
  if (!p.is_nonnegative()) throw std::domain_error("tensor has a negative entry");
  std::vector<BoundaryComponent> out;
  const std::size_t n = p.order();
  if (n < 3) return out;
  auto low_rank = [&](const Tensor<T>& s) {
    return s.order() == 2 ? matrix_rank(as_matrix(s), tol) <= 1 : flattening_rank(s, tol) <= 1;
  };
  for (std::size_t r = 1; r <= n; ++r)
    for (std::size_t k = 1; k <= p.shape()[r - 1]; ++k)
      if (low_rank(slice(p, r, k))) out.push_back(BoundaryComponent::slice(r, k));
  if (include_double_slices && !(p.shape() == Shape{2, 2, 2})) {
    for (std::size_t r = 1; r <= n; ++r)
      for (std::size_t i = 1; i <= p.shape()[r - 1]; ++i)
        for (std::size_t j = i + 1; j <= p.shape()[r - 1]; ++j)
          if (matrix_rank(axis_flattening(double_slice(p, r, i, j), r), tol) <= 1)
            out.push_back(BoundaryComponent::double_slice(r, i, j));
  }
  return out;
}

// ---------------------------------------------------------------- Jukes-Cantor slice

/// (p111, ..., p222) = (x, y, z, w, w, z, y, x).
template <Scalar T>
Tensor<T> jukes_cantor_tensor(const T& x, const T& y, const T& z, const T& w) {
  return Tensor<T>(Shape{2, 2, 2}, {x, y, z, w, w, z, y, x});
}

/// The four linear factors of Det on the slice; f[1..3] fix the region.
template <Scalar T>
std::array<T, 4> jukes_cantor_factors(const T& x, const T& y, const T& z, const T& w) {
  return {x + y + z + w, x + y - z - w, x - y + z - w, x - y - z + w};
}

/// Sign pattern of the last three factors lies in one of the four bipyramids.
template <Scalar T>
bool jukes_cantor_in_bipyramid(const std::array<T, 4>& f) {
  return sign_of(f[1]) * sign_of(f[2]) * sign_of(f[3]) > 0;
}

/// Canonical toric cells containing the slice point.
template <Scalar T>
std::vector<PermutationTuple> jukes_cantor_cells(const T& x, const T& y, const T& z, const T& w,
                                                 const SupermodularOptions& opt = {}) {
  return toric_cells(jukes_cantor_tensor(x, y, z, w), opt);
}

}  // namespace nnrank
