#pragma once

#include "nnrank/tensor_ops.hpp"

#include <stdexcept>
#include <vector>

namespace nnrank {

/// P = s * a_1 (x) ... (x) a_n + t * b_1 (x) ... (x) b_n, with every a_r, b_r
/// nonnegative and summing to one.
template <Scalar T>
struct Rank2Decomposition {
  Shape shape;
  std::vector<std::vector<T>> a;
  std::vector<std::vector<T>> b;
  T s{0};
  T t{0};

  void validate_shape() const {
    if (a.size() != shape.order() || b.size() != shape.order())
      throw std::invalid_argument("decomposition has the wrong number of factor vectors");
    for (std::size_t r = 0; r < shape.order(); ++r)
      if (a[r].size() != shape[r] || b[r].size() != shape[r])
        throw std::invalid_argument("factor vector length does not match axis " + std::to_string(r + 1));
  }
};

/// Entrywise s * (x)_r a_r + t * (x)_r b_r.
template <Scalar T>
Tensor<T> tensor_from_rank2(const Rank2Decomposition<T>& d) {
  d.validate_shape();
  if (d.shape.order() == 0) return Tensor<T>(Shape{}, {d.s + d.t});
  Tensor<T> first = outer(d.a).scaled(d.s);
  if (d.t == 0) return first;
  return first + outer(d.b).scaled(d.t);
}

template <Scalar T>
Rank2Decomposition<double> to_double(const Rank2Decomposition<T>& d) {
  Rank2Decomposition<double> out;
  out.shape = d.shape;
  auto conv = [](const std::vector<std::vector<T>>& vs) {
    std::vector<std::vector<double>> o;
    for (const auto& v : vs) {
      std::vector<double> w;
      for (const auto& x : v) w.push_back(to_double(x));
      o.push_back(std::move(w));
    }
    return o;
  };
  out.a = conv(d.a);
  out.b = conv(d.b);
  out.s = to_double(d.s);
  out.t = to_double(d.t);
  return out;
}

/// max |P - Q| / max |P| (absolute error when P is zero).
template <Scalar T, Scalar U>
double relative_error(const Tensor<T>& p, const Tensor<U>& q) {
  if (!(p.shape() == q.shape())) throw std::invalid_argument("relative_error: shape mismatch");
  double err = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) err = std::max(err, std::fabs(to_double(p[i]) - to_double(q[i])));
  const double scale = p.max_abs();
  return scale > 0 ? err / scale : err;
}

}  // namespace nnrank
