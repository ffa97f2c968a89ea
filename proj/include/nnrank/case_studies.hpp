#pragma once

// Two rank-3 formats.
//
// 3x3x2, nonnegative rank <= 3. With slices P1 = [p_ij1], P2 = [p_ij2] of a
// decomposition sum_l pi_l x_l (x) y_l (x) z_l,
//
//   P1 P2^{-1}     = X diag(z_l1 / z_l2) X^{-1}
//   P1^T P2^{-T}   = Y diag(z_l1 / z_l2) Y^{-1}
//
// so the factors are read off the two eigensystems, paired by eigenvalue.
//
// 2x2x2x2, border rank <= 3: every 4x4 flattening is singular.

#include "nnrank/decomposition.hpp"
#include "nnrank/k_terms.hpp"
#include "nnrank/linalg.hpp"
#include "nnrank/tensor_ops.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnrank {

class SingularSlice : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

template <Scalar T>
struct Rank3Params332 {
  std::vector<T> pi;
  std::vector<T> a1, a2, b1, b2, c1, c2;  // length 3
  std::vector<T> a3, b3, c3;              // length 2

  void validate(double tol = 1e-9) const {
    auto check = [&](const std::vector<T>& v, std::size_t len, const char* name) {
      if (v.size() != len) throw std::invalid_argument(std::string(name) + " has the wrong length");
      T s(0);
      for (const auto& x : v) {
        if (x < 0) throw std::invalid_argument(std::string(name) + " has a negative entry");
        s += x;
      }
      const bool unit = is_exact_v<T> ? s == 1 : std::fabs(to_double(s) - 1.0) <= tol;
      if (!unit) throw std::invalid_argument(std::string(name) + " must sum to 1");
    };
    check(pi, 3, "pi");
    check(a1, 3, "a1");
    check(a2, 3, "a2");
    check(b1, 3, "b1");
    check(b2, 3, "b2");
    check(c1, 3, "c1");
    check(c2, 3, "c2");
    check(a3, 2, "a3");
    check(b3, 2, "b3");
    check(c3, 2, "c3");
  }
};

template <Scalar T>
Tensor<T> param_332(const Rank3Params332<T>& q) {
  q.validate();
  return outer<T>({q.a1, q.a2, q.a3}).scaled(q.pi[0]) + outer<T>({q.b1, q.b2, q.b3}).scaled(q.pi[1]) +
         outer<T>({q.c1, q.c2, q.c3}).scaled(q.pi[2]);
}

namespace detail {

template <Scalar T>
void require_332(const Tensor<T>& p) {
  if (!(p.shape() == Shape{3, 3, 2})) throw std::invalid_argument("expected a 3x3x2 tensor, got " + p.shape().to_string());
}

template <Scalar T>
T det3(const std::vector<T>& a, const std::vector<T>& b, const std::vector<T>& c) {
  return a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1]) + c[0] * (a[1] * b[2] - a[2] * b[1]);
}

inline Eigen::Matrix3d slice332(const Tensor<double>& p, std::size_t k) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = p[static_cast<std::size_t>((i * 3 + j) * 2) + k];
  return m;
}

inline double relative_det3(const Eigen::Matrix3d& m) {
  const double fro = m.norm();
  return fro < kZeroMatrixFloor ? 0.0 : std::fabs(m.determinant()) / (fro * fro * fro);
}

}  // namespace detail

/// The degree-6 polynomial K, evaluated term by term.
template <Scalar T>
T k_polynomial(const Tensor<T>& p) {
  detail::require_332(p);
  T k(0);
  for (const auto& term : detail::kKTerms) {
    T m(term.coef);
    for (int code : term.entries) {
      const std::size_t i = code / 100, j = code / 10 % 10, l = code % 10;
      m *= p[((i - 1) * 3 + (j - 1)) * 2 + (l - 1)];
    }
    k += m;
  }
  return k;
}

/// pi1^2 pi2^2 pi3^2 a13 b13 c13 (a31 b32 - a32 b31)(a31 c32 - a32 c31)(b31 c32 - b32 c31)
///   * det[a1,b1,c1] * det[a2,b2,c2]^2.  On parametrized points K equals minus this product.
template <Scalar T>
T k_factorization(const Rank3Params332<T>& q) {
  const T pis = q.pi[0] * q.pi[1] * q.pi[2];
  const T d2 = detail::det3(q.a2, q.b2, q.c2);
  return pis * pis * q.a1[2] * q.b1[2] * q.c1[2] * (q.a3[0] * q.b3[1] - q.a3[1] * q.b3[0]) *
         (q.a3[0] * q.c3[1] - q.a3[1] * q.c3[0]) * (q.b3[0] * q.c3[1] - q.b3[1] * q.c3[0]) *
         detail::det3(q.a1, q.b1, q.c1) * d2 * d2;
}

struct EigenMembershipReport {
  bool pass = false;
  /// eigenvalues of P1 P2^{-1} and of P1^T P2^{-T}, paired by index
  std::vector<std::complex<double>> eigenvalues_1, eigenvalues_2;
  /// eigenvectors (max-abs entry scaled to +1), one per eigenvalue
  std::vector<std::vector<double>> eigenvectors_1, eigenvectors_2;
  std::vector<std::string> diagnostics;
  /// on pass: pi and unit-sum factors x_l, y_l, z_l of each term
  std::optional<Rank3Params332<double>> decomposition;
  double reconstruction_error = 0.0;
};

namespace detail {

struct EigenSystem {
  std::vector<std::complex<double>> values;
  std::vector<std::vector<std::complex<double>>> vectors;
};

inline EigenSystem eigen_system(const Eigen::Matrix3d& m) {
  Eigen::EigenSolver<Eigen::Matrix3d> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigen decomposition failed");
  EigenSystem out;
  for (int l = 0; l < 3; ++l) {
    out.values.push_back(es.eigenvalues()(l));
    std::vector<std::complex<double>> v(3);
    for (int i = 0; i < 3; ++i) v[i] = es.eigenvectors()(i, l);
    out.vectors.push_back(std::move(v));
  }
  return out;
}

/// Real vector scaled so its largest-magnitude entry is +1.
inline std::vector<double> sign_normalized(const std::vector<std::complex<double>>& v) {
  // rotate the complex phase away using the largest entry
  std::size_t k = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[k])) k = i;
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] / v[k]).real();
  return out;
}

}  // namespace detail

/// Membership in the 3x3x2 nonnegative-rank-3 model via the two eigensystems.
/// Throws SingularSlice when either slice has relative determinant <= tol.
inline EigenMembershipReport eigen_membership_332(const Tensor<double>& p, double tol = 1e-9) {
  detail::require_332(p);
  if (!p.is_nonnegative()) throw std::domain_error("tensor has a negative entry");
  const Eigen::Matrix3d p1 = detail::slice332(p, 0), p2 = detail::slice332(p, 1);
  for (int k = 0; k < 2; ++k)
    if (detail::relative_det3(k == 0 ? p1 : p2) <= tol)
      throw SingularSlice("slice " + std::to_string(k + 1) + " is singular; membership is undefined there");
  const Eigen::Matrix3d p2inv = p2.inverse();
  const auto e1 = detail::eigen_system(p1 * p2inv);
  const auto e2 = detail::eigen_system(p1.transpose() * p2inv.transpose());

  EigenMembershipReport rep;
  // pair eigenvalues of the second system with the first
  std::array<int, 3> perm{0, 1, 2}, best_perm = perm;
  double best = std::numeric_limits<double>::infinity();
  do {
    double d = 0;
    for (int l = 0; l < 3; ++l) d += std::abs(e1.values[l] - e2.values[perm[l]]);
    if (d < best) {
      best = d;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  double scale = 0;
  for (const auto& v : e1.values) scale = std::max(scale, std::abs(v));
  bool ok = true;
  for (int l = 0; l < 3; ++l) {
    rep.eigenvalues_1.push_back(e1.values[l]);
    rep.eigenvalues_2.push_back(e2.values[best_perm[l]]);
    rep.eigenvectors_1.push_back(detail::sign_normalized(e1.vectors[l]));
    rep.eigenvectors_2.push_back(detail::sign_normalized(e2.vectors[best_perm[l]]));
    if (std::fabs(e1.values[l].imag()) > tol * std::max(1.0, scale)) {
      ok = false;
      rep.diagnostics.push_back("complex eigenvalue");
    } else if (e1.values[l].real() < -tol * std::max(1.0, scale)) {
      ok = false;
      rep.diagnostics.push_back("negative eigenvalue");
    }
  }
  for (int l = 0; l < 3; ++l)
    for (int m = l + 1; m < 3; ++m)
      if (std::abs(e1.values[l] - e1.values[m]) <= 1e-6 * std::max(1.0, scale))
        rep.diagnostics.push_back("repeated eigenvalue: eigenvectors not unique");
  for (const auto* vs : {&rep.eigenvectors_1, &rep.eigenvectors_2})
    for (const auto& v : *vs)
      if (*std::min_element(v.begin(), v.end()) < -tol) {
        ok = false;
        rep.diagnostics.push_back("eigenvector with entries of both signs");
      }
  if (!ok) return rep;

  // weights from D_k = X^{-1} P_k Y^{-T}
  Eigen::Matrix3d x, y;
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 3; ++i) {
      x(i, l) = rep.eigenvectors_1[l][i];
      y(i, l) = rep.eigenvectors_2[l][i];
    }
  if (detail::relative_det3(x) <= tol || detail::relative_det3(y) <= tol) {
    rep.diagnostics.push_back("eigenvectors are linearly dependent");
    return rep;
  }
  const Eigen::Matrix3d xi = x.inverse(), yit = y.inverse().transpose();
  const Eigen::Matrix3d d1 = xi * p1 * yit, d2 = xi * p2 * yit;

  Rank3Params332<double> q;
  std::array<std::vector<double>*, 3> xs{&q.a1, &q.b1, &q.c1}, ys{&q.a2, &q.b2, &q.c2}, zs{&q.a3, &q.b3, &q.c3};
  for (int l = 0; l < 3; ++l) {
    std::vector<double> xv(3), yv(3);
    for (int i = 0; i < 3; ++i) {
      xv[i] = std::max(0.0, x(i, l));
      yv[i] = std::max(0.0, y(i, l));
    }
    const double sx = xv[0] + xv[1] + xv[2], sy = yv[0] + yv[1] + yv[2];
    std::vector<double> w{d1(l, l) * sx * sy, d2(l, l) * sx * sy};
    const double wscale = std::max(std::fabs(w[0]), std::fabs(w[1]));
    for (auto& v : w) {
      if (v < -tol * wscale) ok = false;
      v = std::max(v, 0.0);
    }
    const double pw = w[0] + w[1];
    if (!(pw > 0)) ok = false;
    for (auto& v : xv) v /= sx;
    for (auto& v : yv) v /= sy;
    if (pw > 0)
      for (auto& v : w) v /= pw;
    q.pi.push_back(pw);
    *xs[l] = xv;
    *ys[l] = yv;
    *zs[l] = w;
  }
  if (!ok) {
    rep.diagnostics.push_back("negative mixture weight");
    return rep;
  }
  const double total = q.pi[0] + q.pi[1] + q.pi[2];
  const auto recon = (outer<double>({q.a1, q.a2, q.a3}).scaled(q.pi[0]) + outer<double>({q.b1, q.b2, q.b3}).scaled(q.pi[1]) +
                      outer<double>({q.c1, q.c2, q.c3}).scaled(q.pi[2]));
  rep.reconstruction_error = relative_error(p, recon);
  for (auto& v : q.pi) v /= total;
  if (rep.reconstruction_error > 1e-8) {
    rep.diagnostics.push_back("reconstruction error " + std::to_string(rep.reconstruction_error));
    return rep;
  }
  rep.decomposition = std::move(q);
  rep.pass = true;
  return rep;
}

struct Boundary332 {
  /// Fired components among a1, a2 (singular slice), b1..b3, c1..c3 (zero eigenvector coordinate).
  std::vector<std::string> components;
  std::vector<std::string> diagnostics;
};

inline Boundary332 boundary_332(const Tensor<double>& p, double tol = 1e-7) {
  detail::require_332(p);
  Boundary332 out;
  const Eigen::Matrix3d p1 = detail::slice332(p, 0), p2 = detail::slice332(p, 1);
  const bool s1 = detail::relative_det3(p1) <= tol, s2 = detail::relative_det3(p2) <= tol;
  if (s1) out.components.push_back("a1");
  if (s2) out.components.push_back("a2");
  if (s1 || s2) {
    out.diagnostics.push_back("singular slice: eigenvector components not evaluated");
    return out;
  }
  const Eigen::Matrix3d p2inv = p2.inverse();
  const auto e1 = detail::eigen_system(p1 * p2inv);
  const auto e2 = detail::eigen_system(p1.transpose() * p2inv.transpose());
  for (const auto& [sys, tag] : {std::pair{&e1, 'b'}, std::pair{&e2, 'c'}})
    for (int i = 0; i < 3; ++i) {
      bool fired = false;
      for (const auto& v : sys->vectors) fired = fired || std::fabs(detail::sign_normalized(v)[i]) <= tol;
      if (fired) out.components.push_back(std::string(1, tag) + std::to_string(i + 1));
    }
  double scale = 0;
  for (const auto& v : e1.values) scale = std::max(scale, std::abs(v));
  for (int l = 0; l < 3; ++l)
    for (int m = l + 1; m < 3; ++m)
      if (std::abs(e1.values[l] - e1.values[m]) <= 1e-6 * std::max(1.0, scale))
        out.diagnostics.push_back("repeated eigenvalue: two third-axis factors coincide (singular locus type 2)");
  return out;
}

struct Membership2222 {
  bool member = false;
  /// relative determinants of the 12|34, 13|24 and 14|23 flattenings
  std::array<double, 3> relative_dets{};
};

/// Zariski closure of border rank <= 3: at least two 4x4 flattening determinants vanish.
template <Scalar T>
Membership2222 membership_2222_variety(const Tensor<T>& p, double tol = 1e-9) {
  if (!(p.shape() == Shape{2, 2, 2, 2})) throw std::invalid_argument("expected a 2x2x2x2 tensor");
  Membership2222 out;
  const std::array<std::vector<std::size_t>, 3> rows{{{1, 2}, {1, 3}, {1, 4}}};
  int vanishing = 0;
  for (int k = 0; k < 3; ++k) {
    const auto f = flatten_matrix(p, rows[k]);
    if constexpr (is_exact_v<T>) {
      out.relative_dets[k] = relative_determinant(to_double(f));
      vanishing += determinant(f) == 0;
    } else {
      out.relative_dets[k] = relative_determinant(f);
      vanishing += out.relative_dets[k] <= tol;
    }
  }
  out.member = vanishing >= 2;
  return out;
}

}  // namespace nnrank
