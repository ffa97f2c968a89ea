#pragma once

// Multiplicative pi-supermodularity:
//
//   p_i * p_j <= p_{i meet j} * p_{i join j}
//
// where meet/join take coordinatewise min/max after relabelling each axis by
// its permutation. A tensor is supermodular when some permutation tuple works;
// each tuple and its total reversal define the same toric cell.

#include "nnrank/tensor_ops.hpp"

#include <algorithm>
#include <cstdint>
#include <future>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace nnrank {

class PermutationTuple {
 public:
  PermutationTuple() = default;

  /// One-line notation per axis, values 1..d_r.
  explicit PermutationTuple(std::vector<std::vector<std::size_t>> perms) : perms_(std::move(perms)) {
    for (const auto& p : perms_) {
      std::vector<int> seen(p.size() + 1, 0);
      for (auto v : p) {
        if (v < 1 || v > p.size() || seen[v]++) throw std::invalid_argument("not a permutation: " + to_string());
      }
    }
  }

  static PermutationTuple identity(const Shape& shape) {
    std::vector<std::vector<std::size_t>> perms;
    for (auto d : shape.dims()) {
      std::vector<std::size_t> p(d);
      std::iota(p.begin(), p.end(), std::size_t{1});
      perms.push_back(std::move(p));
    }
    return PermutationTuple(std::move(perms));
  }

  std::size_t order() const { return perms_.size(); }
  const std::vector<std::vector<std::size_t>>& perms() const { return perms_; }

  /// pi_r(k) with 1-based axis and value.
  std::size_t operator()(std::size_t axis, std::size_t k) const { return perms_.at(axis - 1).at(k - 1); }

  bool matches(const Shape& shape) const {
    if (shape.order() != order()) return false;
    for (std::size_t r = 0; r < order(); ++r)
      if (perms_[r].size() != shape[r]) return false;
    return true;
  }

  /// Every permutation composed with the order-reversing map.
  PermutationTuple reversed() const {
    auto out = perms_;
    for (auto& p : out)
      for (auto& v : p) v = p.size() + 1 - v;
    return PermutationTuple(std::move(out));
  }

  PermutationTuple inverse() const {
    auto out = perms_;
    for (std::size_t r = 0; r < perms_.size(); ++r)
      for (std::size_t k = 0; k < perms_[r].size(); ++k) out[r][perms_[r][k] - 1] = k + 1;
    return PermutationTuple(std::move(out));
  }

  PermutationTuple canonical() const {
    auto rev = reversed();
    return rev < *this ? rev : *this;
  }
  bool is_canonical() const { return !(reversed() < *this); }

  PermutationTuple without_axis(std::size_t axis) const {
    auto out = perms_;
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(axis - 1));
    return PermutationTuple(std::move(out));
  }

  auto operator<=>(const PermutationTuple&) const = default;
  bool operator==(const PermutationTuple&) const = default;

  /// JSON-like text, e.g. [[1,2],[2,1]].
  std::string to_string() const {
    std::string s = "[";
    for (std::size_t r = 0; r < perms_.size(); ++r) {
      if (r) s += ",";
      s += "[";
      for (std::size_t k = 0; k < perms_[r].size(); ++k) {
        if (k) s += ",";
        s += std::to_string(perms_[r][k]);
      }
      s += "]";
    }
    return s + "]";
  }

  /// Compact label, e.g. 12|12|21 (digits only meaningful for d_r <= 9).
  std::string label() const {
    std::string s;
    for (std::size_t r = 0; r < perms_.size(); ++r) {
      if (r) s += "|";
      for (auto v : perms_[r]) s += std::to_string(v);
    }
    return s;
  }

 private:
  std::vector<std::vector<std::size_t>> perms_;
};

inline MultiIndex pi_meet(const MultiIndex& i, const MultiIndex& j, const PermutationTuple& pi) {
  if (i.size() != j.size() || i.size() != pi.order()) throw std::invalid_argument("pi_meet: shape mismatch");
  MultiIndex k(i.size());
  for (std::size_t r = 0; r < i.size(); ++r) k[r] = pi(r + 1, i[r]) <= pi(r + 1, j[r]) ? i[r] : j[r];
  return k;
}

inline MultiIndex pi_join(const MultiIndex& i, const MultiIndex& j, const PermutationTuple& pi) {
  if (i.size() != j.size() || i.size() != pi.order()) throw std::invalid_argument("pi_join: shape mismatch");
  MultiIndex l(i.size());
  for (std::size_t r = 0; r < i.size(); ++r) l[r] = pi(r + 1, i[r]) >= pi(r + 1, j[r]) ? i[r] : j[r];
  return l;
}

/// Four indices with p_i * p_j > p_k * p_l, k = i meet j, l = i join j.
struct ViolationWitness {
  MultiIndex i, j, k, l;
};

struct SupermodularCertificate {
  bool pass = false;
  PermutationTuple pi;
  std::optional<ViolationWitness> witness;
  /// Number of nontrivial inequalities evaluated.
  std::size_t comparisons = 0;
};

class SearchTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SupermodularOptions {
  /// Float mode only: a violation must exceed tol * (max entry)^2.
  double tol = 1e-12;
  bool parallel = false;
  /// Upper bound on d_1! ... d_n! / 2 for the cell search.
  std::size_t max_cells = 1'000'000;
};

namespace detail {

/// Per-entry positions in pi-order, cached for the pair scans.
struct RankedIndex {
  std::vector<std::size_t> strides;
  std::vector<std::size_t> dims;
  // rank[r][k0] = pi_r(k0 + 1) - 1
  std::vector<std::vector<std::size_t>> rank;
};

inline RankedIndex ranked_index(const Shape& shape, const PermutationTuple& pi) {
  if (!pi.matches(shape)) throw std::invalid_argument("permutation tuple does not match tensor shape");
  RankedIndex ri{shape.strides(), shape.dims(), {}};
  for (const auto& p : pi.perms()) {
    std::vector<std::size_t> r(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) r[k] = p[k] - 1;
    ri.rank.push_back(std::move(r));
  }
  return ri;
}

template <Scalar T>
bool violates(const T& pi_, const T& pj, const T& pk, const T& pl, double tol, double scale2) {
  if constexpr (is_exact_v<T>) {
    return pi_ * pj > pk * pl;
  } else {
    return pi_ * pj - pk * pl > tol * scale2;
  }
}

template <Scalar T>
void require_nonnegative(const Tensor<T>& p) {
  if (!p.is_nonnegative()) throw std::domain_error("tensor has a negative entry");
}

template <Scalar T>
SupermodularCertificate fail_with(const Tensor<T>& p, const PermutationTuple& pi, std::size_t a, std::size_t b,
                                  std::size_t k, std::size_t l, std::size_t comparisons) {
  return SupermodularCertificate{false, pi,
                                 ViolationWitness{p.multi_index(a), p.multi_index(b), p.multi_index(k), p.multi_index(l)},
                                 comparisons};
}

}  // namespace detail

/// Checks every unordered pair of entries: O(N^2) comparisons.
template <Scalar T>
SupermodularCertificate is_pi_supermodular_full(const Tensor<T>& p, const PermutationTuple& pi,
                                                const SupermodularOptions& opt = {}) {
  detail::require_nonnegative(p);
  const auto ri = detail::ranked_index(p.shape(), pi);
  const std::size_t n = p.order();
  const std::size_t total = p.size();
  const double scale2 = p.max_abs() * p.max_abs();
  std::vector<std::vector<std::size_t>> coords(total);
  for (std::size_t f = 0; f < total; ++f) {
    auto mi = p.multi_index(f);
    for (auto& c : mi) --c;
    coords[f] = std::move(mi);
  }
  std::size_t comparisons = 0;
  for (std::size_t a = 0; a < total; ++a) {
    for (std::size_t b = a + 1; b < total; ++b) {
      std::size_t meet = 0, join = 0;
      bool comparable_low = true, comparable_high = true;
      for (std::size_t r = 0; r < n; ++r) {
        const auto ca = coords[a][r], cb = coords[b][r];
        const bool a_low = ri.rank[r][ca] <= ri.rank[r][cb];
        meet += (a_low ? ca : cb) * ri.strides[r];
        join += (a_low ? cb : ca) * ri.strides[r];
        if (!a_low) comparable_low = false;
        if (ri.rank[r][ca] < ri.rank[r][cb]) comparable_high = false;
      }
      if (comparable_low || comparable_high) continue;
      ++comparisons;
      if (detail::violates(p[a], p[b], p[meet], p[join], opt.tol, scale2))
        return detail::fail_with(p, pi, a, b, meet, join, comparisons);
    }
  }
  return SupermodularCertificate{true, pi, std::nullopt, comparisons};
}

/// Checks only pairs differing in exactly two positions. Sound and complete
/// for strictly positive tensors; zeros must take the full check.
template <Scalar T>
SupermodularCertificate is_pi_supermodular_facets(const Tensor<T>& p, const PermutationTuple& pi,
                                                  const SupermodularOptions& opt = {}) {
  if (!p.is_positive()) throw std::domain_error("facet check requires a strictly positive tensor");
  const auto ri = detail::ranked_index(p.shape(), pi);
  const std::size_t n = p.order();
  const double scale2 = p.max_abs() * p.max_abs();
  std::size_t comparisons = 0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    auto mi = p.multi_index(a);
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t ar = mi[r] - 1;
      for (std::size_t s = r + 1; s < n; ++s) {
        const std::size_t as = mi[s] - 1;
        for (std::size_t u = 0; u < ri.dims[r]; ++u) {
          if (ri.rank[r][u] <= ri.rank[r][ar]) continue;  // b is higher on axis r
          for (std::size_t v = 0; v < ri.dims[s]; ++v) {
            if (ri.rank[s][v] >= ri.rank[s][as]) continue;  // and lower on axis s
            const std::size_t b = a + (u - ar) * ri.strides[r] + v * ri.strides[s] - as * ri.strides[s];
            const std::size_t meet = a + v * ri.strides[s] - as * ri.strides[s];
            const std::size_t join = a + (u - ar) * ri.strides[r];
            ++comparisons;
            if (detail::violates(p[a], p[b], p[meet], p[join], opt.tol, scale2))
              return detail::fail_with(p, pi, a, b, meet, join, comparisons);
          }
        }
      }
    }
  }
  return SupermodularCertificate{true, pi, std::nullopt, comparisons};
}

/// Facet path for positive tensors, full check otherwise.
template <Scalar T>
SupermodularCertificate is_pi_supermodular(const Tensor<T>& p, const PermutationTuple& pi,
                                           const SupermodularOptions& opt = {}) {
  detail::require_nonnegative(p);
  return p.is_positive() ? is_pi_supermodular_facets(p, pi, opt) : is_pi_supermodular_full(p, pi, opt);
}

/// n(n-1)2^{n-3}: the number of two-position comparisons on a 2x...x2 tensor.
inline std::uint64_t facet_count_binary(std::size_t n) {
  if (n < 3) throw std::invalid_argument("facet count is defined for n >= 3");
  return static_cast<std::uint64_t>(n) * (n - 1) * (std::uint64_t{1} << (n - 3));
}

/// d_1! ... d_n! / 2 (1 when every axis has size 1); saturates at SIZE_MAX.
inline std::size_t toric_cell_count(const Shape& shape) {
  long double total = 1;
  for (auto d : shape.dims())
    for (std::size_t k = 2; k <= d; ++k) total *= static_cast<long double>(k);
  const bool reversible = std::any_of(shape.dims().begin(), shape.dims().end(), [](auto d) { return d > 1; });
  if (reversible) total /= 2;
  if (total > static_cast<long double>(SIZE_MAX)) return SIZE_MAX;
  return static_cast<std::size_t>(total);
}

/// Canonical permutation tuples in lexicographic order of their one-line notations.
inline std::vector<PermutationTuple> canonical_tuples(const Shape& shape, std::size_t max_cells = 1'000'000) {
  const auto count = toric_cell_count(shape);
  if (count > max_cells)
    throw SearchTooLarge("toric cell search too large: " + std::to_string(count) + " cells for shape " +
                         shape.to_string());
  std::vector<std::vector<std::vector<std::size_t>>> per_axis;
  for (auto d : shape.dims()) {
    std::vector<std::size_t> p(d);
    std::iota(p.begin(), p.end(), std::size_t{1});
    std::vector<std::vector<std::size_t>> all;
    do all.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    per_axis.push_back(std::move(all));
  }
  std::vector<PermutationTuple> out;
  out.reserve(count);
  std::vector<std::size_t> odo(shape.order(), 0);
  while (true) {
    std::vector<std::vector<std::size_t>> perms;
    for (std::size_t r = 0; r < odo.size(); ++r) perms.push_back(per_axis[r][odo[r]]);
    PermutationTuple t(std::move(perms));
    if (t.is_canonical()) out.push_back(std::move(t));
    std::size_t r = odo.size();
    while (r-- > 0) {
      if (++odo[r] < per_axis[r].size()) break;
      odo[r] = 0;
    }
    if (r == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

namespace detail {

/// Verdicts for tuples[first, last), evaluated on worker threads when asked.
template <Scalar T>
std::vector<char> evaluate_cells(const Tensor<T>& p, const std::vector<PermutationTuple>& tuples, std::size_t first,
                                 std::size_t last, const SupermodularOptions& opt) {
  std::vector<char> pass(last - first, 0);
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) pass[k - first] = is_pi_supermodular(p, tuples[k], opt).pass ? 1 : 0;
  };
  const std::size_t threads = opt.parallel ? std::max<std::size_t>(1, std::thread::hardware_concurrency()) : 1;
  if (threads <= 1 || last - first < 2 * threads) {
    work(first, last);
    return pass;
  }
  std::vector<std::future<void>> jobs;
  const std::size_t chunk = (last - first + threads - 1) / threads;
  for (std::size_t lo = first; lo < last; lo += chunk)
    jobs.push_back(std::async(std::launch::async, work, lo, std::min(last, lo + chunk)));
  for (auto& j : jobs) j.get();
  return pass;
}

}  // namespace detail

/// Lexicographically smallest canonical tuple under which P is supermodular.
template <Scalar T>
std::optional<PermutationTuple> find_pi(const Tensor<T>& p, const SupermodularOptions& opt = {}) {
  detail::require_nonnegative(p);
  const auto tuples = canonical_tuples(p.shape(), opt.max_cells);
  const std::size_t block = opt.parallel ? 256 : tuples.size();
  for (std::size_t first = 0; first < tuples.size(); first += block) {
    const std::size_t last = std::min(tuples.size(), first + block);
    const auto pass = detail::evaluate_cells(p, tuples, first, last, opt);
    for (std::size_t k = 0; k < pass.size(); ++k)
      if (pass[k]) return tuples[first + k];
  }
  return std::nullopt;
}

/// Every canonical tuple whose toric cell contains P.
template <Scalar T>
std::vector<PermutationTuple> toric_cells(const Tensor<T>& p, const SupermodularOptions& opt = {}) {
  detail::require_nonnegative(p);
  const auto tuples = canonical_tuples(p.shape(), opt.max_cells);
  const auto pass = detail::evaluate_cells(p, tuples, 0, tuples.size(), opt);
  std::vector<PermutationTuple> out;
  for (std::size_t k = 0; k < tuples.size(); ++k)
    if (pass[k]) out.push_back(tuples[k]);
  return out;
}

/// Relabels entries: (pi P)_{pi(i)} = P_i.
template <Scalar T>
Tensor<T> relabel(const Tensor<T>& p, const PermutationTuple& pi) {
  if (!pi.matches(p.shape())) throw std::invalid_argument("permutation tuple does not match tensor shape");
  std::vector<T> out(p.size());
  std::vector<std::size_t> target(p.order());
  for_each_index(p.shape(), [&](const std::vector<std::size_t>& idx, std::size_t flat) {
    for (std::size_t r = 0; r < idx.size(); ++r) target[r] = pi(r + 1, idx[r] + 1) - 1;
    out[p.flat_index(target)] = p[flat];
  });
  return Tensor<T>(p.shape(), std::move(out));
}

using IndexCollection = std::vector<MultiIndex>;

/// Ahlswede-Daykin for a pi-supermodular P: p_C * p_C' <= p_{C join C'} * p_{C meet C'}.
template <Scalar T>
bool four_function_check(const Tensor<T>& p, const PermutationTuple& pi, const IndexCollection& c,
                         const IndexCollection& c2, const SupermodularOptions& opt = {}) {
  if (c.empty() || c2.empty()) throw std::invalid_argument("index collections must be nonempty");
  if (!is_pi_supermodular_full(p, pi, opt).pass) throw std::domain_error("tensor is not pi-supermodular");
  auto mass = [&](const std::set<MultiIndex>& s) {
    T acc(0);
    for (const auto& i : s) acc += p(i);
    return acc;
  };
  std::set<MultiIndex> sc(c.begin(), c.end()), sc2(c2.begin(), c2.end()), meets, joins;
  for (const auto& i : sc)
    for (const auto& j : sc2) {
      meets.insert(pi_meet(i, j, pi));
      joins.insert(pi_join(i, j, pi));
    }
  const T lhs = mass(sc) * mass(sc2);
  const T rhs = mass(joins) * mass(meets);
  if constexpr (is_exact_v<T>) {
    return lhs <= rhs;
  } else {
    const double scale = to_double(p.sum());
    return lhs - rhs <= opt.tol * scale * scale;
  }
}

/// Supermodularity of a flattening Q = flatten(P, blocks) under the lattice
/// carried over from P's pi-lattice through the index correspondence.
template <Scalar T>
SupermodularCertificate is_supermodular_induced(const Tensor<T>& q, const Shape& original, const Partition& blocks,
                                                const PermutationTuple& pi, const SupermodularOptions& opt = {}) {
  detail::require_nonnegative(q);
  const auto canon = detail::canonical_partition(blocks, original.order());
  if (q.order() != canon.size() || q.size() != original.size())
    throw std::invalid_argument("flattening does not match the original shape");
  // composite index of each block -> original coordinates, and back
  auto to_original = [&](const MultiIndex& alpha) {
    MultiIndex i(original.order());
    for (std::size_t b = 0; b < canon.size(); ++b) {
      std::size_t composite = alpha[b] - 1;
      for (std::size_t k = canon[b].size(); k-- > 0;) {
        const auto axis = canon[b][k];
        i[axis - 1] = composite % original[axis - 1] + 1;
        composite /= original[axis - 1];
      }
    }
    return i;
  };
  auto to_flat = [&](const MultiIndex& i) {
    MultiIndex alpha(canon.size());
    for (std::size_t b = 0; b < canon.size(); ++b) {
      std::size_t composite = 0;
      for (auto axis : canon[b]) composite = composite * original[axis - 1] + (i[axis - 1] - 1);
      alpha[b] = composite + 1;
    }
    return alpha;
  };
  const double scale2 = q.max_abs() * q.max_abs();
  std::size_t comparisons = 0;
  for (std::size_t a = 0; a < q.size(); ++a) {
    const auto alpha = q.multi_index(a);
    const auto i = to_original(alpha);
    for (std::size_t b = a + 1; b < q.size(); ++b) {
      const auto beta = q.multi_index(b);
      const auto j = to_original(beta);
      const auto km = to_flat(pi_meet(i, j, pi));
      const auto lj = to_flat(pi_join(i, j, pi));
      ++comparisons;
      if (detail::violates(q[a], q[b], q(km), q(lj), opt.tol, scale2))
        return SupermodularCertificate{false, pi, ViolationWitness{alpha, beta, km, lj}, comparisons};
    }
  }
  return SupermodularCertificate{true, pi, std::nullopt, comparisons};
}

}  // namespace nnrank
