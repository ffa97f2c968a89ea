#pragma once

// Structural tensor operations: slices, flattenings, marginals, axis actions,
// flattening rank and a finite-difference Jacobian rank.
//
// Axis and index arguments are 1-based.

#include "nnrank/linalg.hpp"
#include "nnrank/tensor.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnrank {

/// Disjoint blocks of 1-based axes covering [n].
using Partition = std::vector<std::vector<std::size_t>>;

namespace detail {

inline void check_axis(std::size_t order, std::size_t axis) {
  if (axis < 1 || axis > order)
    throw std::out_of_range("axis " + std::to_string(axis) + " out of range for order " + std::to_string(order));
}

inline void check_index(std::size_t dim, std::size_t index) {
  if (index < 1 || index > dim)
    throw std::out_of_range("index " + std::to_string(index) + " out of range for axis of size " +
                            std::to_string(dim));
}

/// Gathers entries of P along `axis0` at the listed 0-based positions.
template <Scalar T>
Tensor<T> restrict_axis(const Tensor<T>& p, std::size_t axis0, const std::vector<std::size_t>& keep, bool drop_axis) {
  auto dims = p.shape().dims();
  dims[axis0] = keep.size();
  Shape kept(dims);
  std::vector<T> out;
  out.reserve(kept.size());
  std::vector<std::size_t> src(p.order());
  for_each_index(kept, [&](const std::vector<std::size_t>& idx, std::size_t) {
    for (std::size_t r = 0; r < idx.size(); ++r) src[r] = idx[r];
    src[axis0] = keep[idx[axis0]];
    out.push_back(p.at(src));
  });
  if (drop_axis) {
    dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(axis0));
    return Tensor<T>(Shape(dims), std::move(out));
  }
  return Tensor<T>(std::move(kept), std::move(out));
}

/// Canonical form of a partition: blocks sorted internally and by smallest member.
inline Partition canonical_partition(Partition blocks, std::size_t order) {
  std::vector<int> seen(order + 1, 0);
  for (auto& b : blocks) {
    if (b.empty()) throw std::invalid_argument("partition block is empty");
    std::sort(b.begin(), b.end());
    for (auto a : b) {
      if (a < 1 || a > order) throw std::invalid_argument("partition names an axis out of range");
      if (seen[a]++) throw std::invalid_argument("partition blocks overlap");
    }
  }
  for (std::size_t a = 1; a <= order; ++a)
    if (!seen[a]) throw std::invalid_argument("partition does not cover every axis");
  std::sort(blocks.begin(), blocks.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return blocks;
}

/// Reshape along an ordered list of blocks (block order kept as given).
template <Scalar T>
Tensor<T> flatten_ordered(const Tensor<T>& p, const Partition& blocks) {
  std::vector<std::size_t> dims;
  for (const auto& b : blocks) {
    std::size_t h = 1;
    for (auto a : b) h *= p.shape()[a - 1];
    dims.push_back(h);
  }
  Shape out_shape(dims);
  std::vector<T> out(p.size());
  const auto out_strides = out_shape.strides();
  for_each_index(p.shape(), [&](const std::vector<std::size_t>& idx, std::size_t flat) {
    std::size_t target = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      std::size_t composite = 0;
      for (auto a : blocks[b]) composite = composite * p.shape()[a - 1] + idx[a - 1];
      target += composite * out_strides[b];
    }
    out[target] = p[flat];
  });
  return Tensor<T>(std::move(out_shape), std::move(out));
}

}  // namespace detail

/// Subtensor with `axis` fixed to `index`; the axis is dropped from the shape.
template <Scalar T>
Tensor<T> slice(const Tensor<T>& p, std::size_t axis, std::size_t index) {
  detail::check_axis(p.order(), axis);
  detail::check_index(p.shape()[axis - 1], index);
  return detail::restrict_axis(p, axis - 1, {index - 1}, true);
}

/// Subtensor restricting `axis` to the ordered pair (i, j).
template <Scalar T>
Tensor<T> double_slice(const Tensor<T>& p, std::size_t axis, std::size_t i, std::size_t j) {
  detail::check_axis(p.order(), axis);
  detail::check_index(p.shape()[axis - 1], i);
  detail::check_index(p.shape()[axis - 1], j);
  if (i == j) throw std::invalid_argument("double slice needs two distinct indices");
  return detail::restrict_axis(p, axis - 1, {i - 1, j - 1}, false);
}

/// Flattening along a partition of the axes. Blocks are ordered by their
/// smallest axis; composite indices within a block are lexicographic in the
/// original axis order.
template <Scalar T>
Tensor<T> flatten(const Tensor<T>& p, Partition partition) {
  return detail::flatten_ordered(p, detail::canonical_partition(std::move(partition), p.order()));
}

/// Matrix flattening with the given axes on the rows, the rest on the columns.
template <Scalar T>
Matrix<T> flatten_matrix(const Tensor<T>& p, std::vector<std::size_t> row_axes) {
  std::vector<std::size_t> col_axes;
  std::sort(row_axes.begin(), row_axes.end());
  for (std::size_t a = 1; a <= p.order(); ++a)
    if (!std::binary_search(row_axes.begin(), row_axes.end(), a)) col_axes.push_back(a);
  if (row_axes.empty() || col_axes.empty()) throw std::invalid_argument("matrix flattening needs two nonempty blocks");
  detail::canonical_partition({row_axes, col_axes}, p.order());
  return as_matrix(detail::flatten_ordered(p, {row_axes, col_axes}));
}

/// The d_axis x (rest) flattening F_axis.
template <Scalar T>
Matrix<T> axis_flattening(const Tensor<T>& p, std::size_t axis) {
  detail::check_axis(p.order(), axis);
  if (p.order() == 1) return Matrix<T>(p.size(), 1, p.entries());
  return flatten_matrix(p, {axis});
}

/// Sum of all slices along `axis`.
template <Scalar T>
Tensor<T> marginalize(const Tensor<T>& p, std::size_t axis) {
  detail::check_axis(p.order(), axis);
  auto dims = p.shape().dims();
  dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(axis - 1));
  Shape out_shape(dims);
  std::vector<T> out(out_shape.size(), T(0));
  const auto strides = out_shape.strides();
  for_each_index(p.shape(), [&](const std::vector<std::size_t>& idx, std::size_t flat) {
    std::size_t target = 0;
    for (std::size_t r = 0, q = 0; r < idx.size(); ++r) {
      if (r == axis - 1) continue;
      target += idx[r] * strides[q++];
    }
    out[target] += p[flat];
  });
  return Tensor<T>(std::move(out_shape), std::move(out));
}

/// The marginal vector on one axis (sum over all other axes).
template <Scalar T>
std::vector<T> axis_marginal(const Tensor<T>& p, std::size_t axis) {
  detail::check_axis(p.order(), axis);
  std::vector<T> out(p.shape()[axis - 1], T(0));
  for_each_index(p.shape(), [&](const std::vector<std::size_t>& idx, std::size_t flat) { out[idx[axis - 1]] += p[flat]; });
  return out;
}

/// Contracts `axis` of P with C (rows = d_axis); the new axis size is C's column count.
template <Scalar T>
Tensor<T> axis_action(const Tensor<T>& p, std::size_t axis, const Matrix<T>& c) {
  detail::check_axis(p.order(), axis);
  const std::size_t a0 = axis - 1;
  if (c.rows() != p.shape()[a0])
    throw std::invalid_argument("axis action: matrix has " + std::to_string(c.rows()) + " rows, axis has size " +
                                std::to_string(p.shape()[a0]));
  auto dims = p.shape().dims();
  dims[a0] = c.cols();
  Shape out_shape(dims);
  std::vector<T> out(out_shape.size(), T(0));
  const auto strides = out_shape.strides();
  for_each_index(p.shape(), [&](const std::vector<std::size_t>& idx, std::size_t flat) {
    if (p[flat] == 0) return;
    std::size_t base = 0;
    for (std::size_t r = 0; r < idx.size(); ++r)
      if (r != a0) base += idx[r] * strides[r];
    for (std::size_t j = 0; j < c.cols(); ++j) out[base + j * strides[a0]] += p[flat] * c(idx[a0], j);
  });
  return Tensor<T>(std::move(out_shape), std::move(out));
}

/// Reorders axes: result axis r is input axis order[r] (1-based).
template <Scalar T>
Tensor<T> permute_axes(const Tensor<T>& p, const std::vector<std::size_t>& order) {
  if (order.size() != p.order()) throw std::invalid_argument("axis permutation has wrong length");
  std::vector<std::size_t> dims;
  std::vector<int> seen(p.order() + 1, 0);
  for (auto a : order) {
    detail::check_axis(p.order(), a);
    if (seen[a]++) throw std::invalid_argument("axis permutation repeats an axis");
    dims.push_back(p.shape()[a - 1]);
  }
  Shape out_shape(dims);
  std::vector<T> out;
  out.reserve(p.size());
  std::vector<std::size_t> src(p.order());
  for_each_index(out_shape, [&](const std::vector<std::size_t>& idx, std::size_t) {
    for (std::size_t r = 0; r < idx.size(); ++r) src[order[r] - 1] = idx[r];
    out.push_back(p.at(src));
  });
  return Tensor<T>(std::move(out_shape), std::move(out));
}

/// Outer product of vectors, in axis order.
template <Scalar T>
Tensor<T> outer(const std::vector<std::vector<T>>& vectors) {
  std::vector<std::size_t> dims;
  for (const auto& v : vectors) dims.push_back(v.size());
  Shape shape(dims);
  std::vector<T> out;
  out.reserve(shape.size());
  for_each_index(shape, [&](const std::vector<std::size_t>& idx, std::size_t) {
    T acc(1);
    for (std::size_t r = 0; r < idx.size(); ++r) acc *= vectors[r][idx[r]];
    out.push_back(acc);
  });
  return Tensor<T>(std::move(shape), std::move(out));
}

template <Scalar T>
Tensor<T> operator+(const Tensor<T>& a, const Tensor<T>& b) {
  if (!(a.shape() == b.shape())) throw std::invalid_argument("tensor sum shape mismatch");
  Tensor<T> out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

template <Scalar T>
Tensor<T> operator-(const Tensor<T>& a, const Tensor<T>& b) {
  if (!(a.shape() == b.shape())) throw std::invalid_argument("tensor difference shape mismatch");
  Tensor<T> out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

/// All two-block partitions {A | A^c} up to swapping, as the block holding axis 1.
inline std::vector<std::vector<std::size_t>> bipartitions(std::size_t order) {
  std::vector<std::vector<std::size_t>> out;
  if (order < 2) return out;
  const std::size_t half = std::size_t{1} << (order - 1);
  for (std::size_t mask = 0; mask < half - 1; ++mask) {
    // axis 1 always in A; bits of mask choose which of axes 2..n join it
    std::vector<std::size_t> a{1};
    for (std::size_t r = 2; r <= order; ++r)
      if (mask & (std::size_t{1} << (r - 2))) a.push_back(r);
    out.push_back(std::move(a));
  }
  return out;
}

struct FlatteningRank {
  std::size_t rank = 0;
  /// Row block of the first flattening attaining the maximum.
  std::vector<std::size_t> witness;
};

/// Maximal matrix rank over all 2^{n-1}-1 two-block flattenings.
template <Scalar T>
FlatteningRank flattening_rank_with_witness(const Tensor<T>& p, double tol = kDefaultRankTol) {
  if (p.order() < 2) throw std::invalid_argument("flattening rank needs order >= 2");
  FlatteningRank best;
  for (const auto& a : bipartitions(p.order())) {
    const auto r = matrix_rank(flatten_matrix(p, a), tol);
    if (best.witness.empty() || r > best.rank) {
      best.rank = r;
      best.witness = a;
    }
  }
  return best;
}

template <Scalar T>
std::size_t flattening_rank(const Tensor<T>& p, double tol = kDefaultRankTol) {
  return flattening_rank_with_witness(p, tol).rank;
}

/// A map from parameters to tensor entries, as used for Jacobian checks.
using ParamMap = std::function<std::vector<double>(const std::vector<double>&)>;

/// Rank of the central-difference Jacobian of `f` at `theta`.
inline std::size_t numeric_jacobian_rank(const ParamMap& f, const std::vector<double>& theta, double h = 1e-5,
                                         double tol = 1e-6) {
  if (!(h > 0)) throw std::invalid_argument("finite-difference step must be positive");
  const auto base = f(theta);
  Matrix<double> jac(base.size(), theta.size());
  auto probe = theta;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    probe[k] = theta[k] + h;
    const auto up = f(probe);
    probe[k] = theta[k] - h;
    const auto down = f(probe);
    probe[k] = theta[k];
    if (up.size() != base.size() || down.size() != base.size())
      throw std::runtime_error("parameter map changed its output size");
    for (std::size_t i = 0; i < base.size(); ++i) jac(i, k) = (up[i] - down[i]) / (2 * h);
  }
  return matrix_rank(jac, tol);
}

}  // namespace nnrank
