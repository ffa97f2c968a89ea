#pragma once

// Dense tensors and matrices.
//
// Storage is row-major with the last index varying fastest. Element access
// through at()/operator[] is 0-based; the named tensor operations in
// tensor_ops.hpp take 1-based axis and index arguments, as does
// operator()(const MultiIndex&).

#include "nnrank/scalar.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nnrank {

/// 1-based coordinates, one per axis.
using MultiIndex = std::vector<std::size_t>;

inline constexpr std::size_t kMaxOrder = 8;

class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}
  explicit Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.size() > kMaxOrder)
      throw std::invalid_argument("tensor order " + std::to_string(dims_.size()) + " exceeds 8");
    for (auto d : dims_)
      if (d == 0) throw std::invalid_argument("axis sizes must be positive");
  }

  std::size_t order() const { return dims_.size(); }
  std::size_t operator[](std::size_t axis0) const { return dims_.at(axis0); }
  const std::vector<std::size_t>& dims() const { return dims_; }

  /// Number of entries; an order-0 shape holds a single scalar.
  std::size_t size() const {
    return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
  }

  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> s(dims_.size(), 1);
    for (std::size_t r = dims_.size(); r-- > 1;) s[r - 1] = s[r] * dims_[r];
    return s;
  }

  bool all_binary() const {
    return std::all_of(dims_.begin(), dims_.end(), [](auto d) { return d == 2; });
  }

  friend bool operator==(const Shape&, const Shape&) = default;

  std::string to_string() const {
    std::string out;
    for (std::size_t r = 0; r < dims_.size(); ++r) {
      if (r) out += "x";
      out += std::to_string(dims_[r]);
    }
    return out.empty() ? "scalar" : out;
  }

 private:
  std::vector<std::size_t> dims_;
};

/// Visits every 0-based multi-index of `shape` in row-major order.
template <class F>
void for_each_index(const Shape& shape, F&& f) {
  const std::size_t n = shape.order();
  std::vector<std::size_t> idx(n, 0);
  const std::size_t total = shape.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    f(std::as_const(idx), flat);
    for (std::size_t r = n; r-- > 0;) {
      if (++idx[r] < shape[r]) break;
      idx[r] = 0;
    }
  }
}

template <Scalar T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(Shape shape, std::vector<T> entries) : shape_(std::move(shape)), data_(std::move(entries)) {
    if (data_.size() != shape_.size())
      throw std::invalid_argument("entry count " + std::to_string(data_.size()) +
                                  " does not match shape " + shape_.to_string());
  }

  static Tensor filled(Shape shape, const T& value) {
    const auto n = shape.size();
    return Tensor(std::move(shape), std::vector<T>(n, value));
  }
  static Tensor zeros(Shape shape) { return filled(std::move(shape), T(0)); }

  const Shape& shape() const { return shape_; }
  std::size_t order() const { return shape_.order(); }
  std::size_t size() const { return data_.size(); }
  const std::vector<T>& entries() const { return data_; }
  std::vector<T>& entries() { return data_; }

  const T& operator[](std::size_t flat) const { return data_[flat]; }
  T& operator[](std::size_t flat) { return data_[flat]; }

  std::size_t flat_index(std::span<const std::size_t> idx0) const {
    if (idx0.size() != order()) throw std::invalid_argument("index arity does not match tensor order");
    std::size_t flat = 0;
    for (std::size_t r = 0; r < idx0.size(); ++r) {
      if (idx0[r] >= shape_[r]) throw std::out_of_range("tensor index out of range");
      flat = flat * shape_[r] + idx0[r];
    }
    return flat;
  }

  const T& at(std::span<const std::size_t> idx0) const { return data_[flat_index(idx0)]; }
  T& at(std::span<const std::size_t> idx0) { return data_[flat_index(idx0)]; }
  const T& at(std::initializer_list<std::size_t> idx0) const {
    return at(std::span<const std::size_t>(idx0.begin(), idx0.size()));
  }

  /// 1-based access mirroring p_{i1 i2 ... in}.
  const T& operator()(const MultiIndex& idx) const { return data_[flat_index(to_zero_based(idx))]; }

  std::vector<std::size_t> to_zero_based(const MultiIndex& idx) const {
    if (idx.size() != order()) throw std::invalid_argument("index arity does not match tensor order");
    std::vector<std::size_t> out(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (idx[r] < 1 || idx[r] > shape_[r]) throw std::out_of_range("1-based index out of range");
      out[r] = idx[r] - 1;
    }
    return out;
  }

  MultiIndex multi_index(std::size_t flat) const {
    MultiIndex idx(order());
    for (std::size_t r = order(); r-- > 0;) {
      idx[r] = flat % shape_[r] + 1;
      flat /= shape_[r];
    }
    return idx;
  }

  bool is_nonnegative() const {
    return std::all_of(data_.begin(), data_.end(), [](const T& x) { return !(x < 0); });
  }
  bool is_positive() const {
    return std::all_of(data_.begin(), data_.end(), [](const T& x) { return x > 0; });
  }
  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const T& x) { return x == 0; });
  }

  T sum() const {
    T acc(0);
    for (const auto& x : data_) acc += x;
    return acc;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& x : data_) m = std::max(m, std::fabs(to_double(x)));
    return m;
  }

  Tensor scaled(const T& c) const {
    Tensor out = *this;
    for (auto& x : out.data_) x *= c;
    return out;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
};

template <Scalar T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows * cols) throw std::invalid_argument("matrix entry count mismatch");
  }
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    for (const auto& r : rows) {
      if (r.size() != cols_) throw std::invalid_argument("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<T>& entries() const { return data_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<T> row(std::size_t i) const {
    return std::vector<T>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
  }
  std::vector<T> col(std::size_t j) const {
    std::vector<T> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& x : data_) m = std::max(m, std::fabs(to_double(x)));
    return m;
  }

  Tensor<T> as_tensor() const { return Tensor<T>(Shape{rows_, cols_}, data_); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <Scalar T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product dimension mismatch");
  Matrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
    }
  return c;
}

template <Scalar T>
Matrix<T> as_matrix(const Tensor<T>& t) {
  if (t.order() != 2) throw std::invalid_argument("tensor is not a matrix");
  return Matrix<T>(t.shape()[0], t.shape()[1], t.entries());
}

inline Tensor<double> to_double(const Tensor<Rational>& t) {
  std::vector<double> out;
  out.reserve(t.size());
  for (const auto& x : t.entries()) out.push_back(x.get_d());
  return Tensor<double>(t.shape(), std::move(out));
}
inline const Tensor<double>& to_double(const Tensor<double>& t) { return t; }

inline Tensor<Rational> to_exact(const Tensor<double>& t) {
  std::vector<Rational> out;
  out.reserve(t.size());
  for (double x : t.entries()) out.push_back(from_double<Rational>(x));
  return Tensor<Rational>(t.shape(), std::move(out));
}

inline Matrix<double> to_double(const Matrix<Rational>& m) {
  Matrix<double> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).get_d();
  return out;
}

template <Scalar Out, Scalar In>
Tensor<Out> convert(const Tensor<In>& t) {
  if constexpr (std::is_same_v<Out, In>) {
    return t;
  } else if constexpr (std::is_same_v<Out, double>) {
    return to_double(t);
  } else {
    return to_exact(t);
  }
}

}  // namespace nnrank
