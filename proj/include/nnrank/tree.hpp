#pragma once

// General Markov model on binary-state trees.
//
// Trees are read from Newick strings. Leaves carry the labels 1..n; internal
// nodes may be named ("(1,2,(3,4)v)u;") and otherwise get the names n1, n2,
// ... in preorder. An edge is identified by the name of its endpoint farther
// from the root, so Markov matrices are keyed by node name.

#include "nnrank/linalg.hpp"
#include "nnrank/tensor_ops.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nnrank {

class TreeParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A directed edge, parent -> child relative to the root (node ids).
struct TreeEdge {
  std::size_t parent = 0;
  std::size_t child = 0;
};

class Tree {
 public:
  struct Node {
    std::string name;
    std::optional<std::size_t> leaf;  // leaf label 1..n
    std::vector<std::size_t> nbrs;
  };

  static Tree parse_newick(std::string_view text) {
    Tree t;
    std::size_t pos = 0;
    std::size_t auto_name = 0;
    auto skip = [&] {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    };
    auto read_name = [&] {
      skip();
      std::string name;
      while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_' ||
                                   text[pos] == '.' || text[pos] == '-'))
        name += text[pos++];
      skip();
      if (pos < text.size() && text[pos] == ':') {  // branch length, ignored
        ++pos;
        while (pos < text.size() && text[pos] != ',' && text[pos] != ')' && text[pos] != ';') ++pos;
      }
      return name;
    };
    // recursive descent with an explicit function object
    std::function<std::size_t()> subtree = [&]() -> std::size_t {
      skip();
      const std::size_t id = t.nodes_.size();
      t.nodes_.push_back({});
      if (pos < text.size() && text[pos] == '(') {
        ++pos;
        const std::string placeholder = "n" + std::to_string(++auto_name);
        while (true) {
          const std::size_t c = subtree();
          t.nodes_[id].nbrs.push_back(c);
          t.nodes_[c].nbrs.push_back(id);
          skip();
          if (pos >= text.size()) throw TreeParseError("unbalanced parentheses in Newick string");
          if (text[pos] == ',') {
            ++pos;
            continue;
          }
          if (text[pos] == ')') {
            ++pos;
            break;
          }
          throw TreeParseError(std::string("unexpected character '") + text[pos] + "' in Newick string");
        }
        const auto name = read_name();
        t.nodes_[id].name = name.empty() ? placeholder : name;
      } else {
        const auto name = read_name();
        if (name.empty()) throw TreeParseError("empty leaf name in Newick string");
        t.nodes_[id].name = name;
        std::size_t label = 0;
        for (char ch : name) {
          if (!std::isdigit(static_cast<unsigned char>(ch))) throw TreeParseError("leaf names must be integers: " + name);
          label = label * 10 + static_cast<std::size_t>(ch - '0');
        }
        t.nodes_[id].leaf = label;
      }
      return id;
    };
    t.root_ = subtree();
    skip();
    if (pos >= text.size() || text[pos] != ';') throw TreeParseError("Newick string must end with ';'");
    ++pos;
    skip();
    if (pos != text.size()) throw TreeParseError("trailing characters after ';'");
    t.validate();
    return t;
  }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_leaves() const { return leaf_node_.size(); }
  std::size_t root() const { return root_; }
  const Node& node(std::size_t id) const { return nodes_.at(id); }

  std::size_t find(std::string_view name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].name == name) return i;
    throw std::invalid_argument("no node named '" + std::string(name) + "'");
  }
  std::size_t leaf_node(std::size_t label) const { return leaf_node_.at(label - 1); }
  bool is_leaf(std::size_t id) const { return nodes_.at(id).leaf.has_value(); }

  /// Edges directed away from the root, in preorder of their child.
  std::vector<TreeEdge> edges() const {
    std::vector<TreeEdge> out;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root_, root_}};
    while (!stack.empty()) {
      auto [v, parent] = stack.back();
      stack.pop_back();
      if (v != parent) out.push_back({parent, v});
      for (auto it = nodes_[v].nbrs.rbegin(); it != nodes_[v].nbrs.rend(); ++it)
        if (*it != parent) stack.push_back({*it, v});
    }
    return out;
  }

  /// Children of v relative to the root, in neighbor order.
  std::vector<std::size_t> children(std::size_t v) const {
    std::vector<std::size_t> out;
    const auto p = parent(v);
    for (auto u : nodes_.at(v).nbrs)
      if (!p || u != *p) out.push_back(u);
    return out;
  }

  std::optional<std::size_t> parent(std::size_t v) const {
    if (v == root_) return std::nullopt;
    for (const auto& e : edges())
      if (e.child == v) return e.parent;
    throw std::logic_error("node not reachable from root");
  }

  TreeEdge edge(std::string_view child_name) const {
    const auto c = find(child_name);
    const auto p = parent(c);
    if (!p) throw std::invalid_argument("the root has no incoming edge");
    return {*p, c};
  }

  std::string edge_name(const TreeEdge& e) const { return nodes_.at(e.child).name; }
  bool is_pendant(const TreeEdge& e) const { return is_leaf(e.child) || is_leaf(e.parent); }

  /// Leaf labels in the component of T - {blocked} containing `start`.
  std::vector<std::size_t> leaves_beyond(std::size_t start, std::size_t blocked) const {
    std::vector<std::size_t> out;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, blocked}};
    while (!stack.empty()) {
      auto [v, from] = stack.back();
      stack.pop_back();
      if (nodes_[v].leaf) out.push_back(*nodes_[v].leaf);
      for (auto u : nodes_[v].nbrs)
        if (u != from) stack.push_back({u, v});
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Nodes of the minimal subtree spanned by the given leaves.
  std::set<std::size_t> spanned_nodes(const std::vector<std::size_t>& labels) const {
    std::set<std::size_t> out;
    if (labels.empty()) return out;
    const std::size_t anchor = leaf_node(labels.front());
    std::vector<std::size_t> up(nodes_.size(), nodes_.size());
    std::vector<std::size_t> stack{anchor};
    up[anchor] = anchor;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto u : nodes_[v].nbrs)
        if (up[u] == nodes_.size()) {
          up[u] = v;
          stack.push_back(u);
        }
    }
    out.insert(anchor);
    for (auto l : labels)
      for (std::size_t v = leaf_node(l); v != anchor; v = up[v]) out.insert(v);
    return out;
  }

  /// A copy rooted at another internal node.
  Tree rerooted(std::size_t new_root) const {
    if (is_leaf(new_root)) throw std::invalid_argument("the root must be an internal node");
    Tree t = *this;
    t.root_ = new_root;
    t.validate();
    return t;
  }

  /// Merges the endpoints of an internal edge; the parent's name survives.
  Tree contracted(const TreeEdge& e) const {
    if (is_pendant(e)) throw std::invalid_argument("cannot contract a pendant edge");
    Tree t;
    std::vector<std::size_t> remap(nodes_.size());
    for (std::size_t i = 0, k = 0; i < nodes_.size(); ++i) {
      if (i == e.child) continue;
      remap[i] = k++;
      t.nodes_.push_back({nodes_[i].name, nodes_[i].leaf, {}});
    }
    remap[e.child] = remap[e.parent];
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      for (auto j : nodes_[i].nbrs) {
        const auto a = remap[i], b = remap[j];
        if (a == b || !seen.insert({std::min(a, b), std::max(a, b)}).second) continue;
        t.nodes_[a].nbrs.push_back(b);
        t.nodes_[b].nbrs.push_back(a);
      }
    t.root_ = remap[root_];
    t.validate();
    return t;
  }

  std::string newick() const { return newick_from(root_, root_) + ";"; }

 private:
  std::string newick_from(std::size_t v, std::size_t from) const {
    if (nodes_[v].leaf) return nodes_[v].name;
    std::string s = "(";
    bool first = true;
    for (auto u : nodes_[v].nbrs) {
      if (u == from && v != from) continue;
      if (!first) s += ",";
      first = false;
      s += newick_from(u, v);
    }
    return s + ")" + nodes_[v].name;
  }

  void validate() {
    std::set<std::string> names;
    std::size_t n = 0;
    for (const auto& nd : nodes_) {
      if (!names.insert(nd.name).second) throw TreeParseError("duplicate node name '" + nd.name + "'");
      if (nd.leaf) ++n;
    }
    if (n < 3) throw TreeParseError("a tree needs at least 3 leaves");
    leaf_node_.assign(n, nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& nd = nodes_[i];
      if (!nd.leaf) {
        const std::size_t min_degree = i == root_ ? 2 : 3;
        if (nd.nbrs.size() < min_degree)
          throw TreeParseError("internal node '" + nd.name + "' has degree " + std::to_string(nd.nbrs.size()));
        continue;
      }
      if (nd.nbrs.size() != 1) throw TreeParseError("leaf '" + nd.name + "' must have degree 1");
      if (*nd.leaf < 1 || *nd.leaf > n || leaf_node_[*nd.leaf - 1] != nodes_.size())
        throw TreeParseError("leaf labels must be a permutation of 1.." + std::to_string(n));
      leaf_node_[*nd.leaf - 1] = i;
    }
    if (nodes_[root_].leaf) throw TreeParseError("the root must be an internal node");
  }

  std::vector<Node> nodes_;
  std::vector<std::size_t> leaf_node_;
  std::size_t root_ = 0;
};

/// Leaf subset A of a split (A, A^c), labels 1..n.
using Split = std::vector<std::size_t>;

namespace detail {

inline Split complement(const Split& a, std::size_t n) {
  Split out;
  for (std::size_t l = 1; l <= n; ++l)
    if (std::find(a.begin(), a.end(), l) == a.end()) out.push_back(l);
  return out;
}

inline void check_split(const Split& a, std::size_t n) {
  std::set<std::size_t> s(a.begin(), a.end());
  if (s.size() != a.size() || a.empty() || a.size() >= n || *s.begin() < 1 || *s.rbegin() > n)
    throw std::invalid_argument("invalid split");
}

}  // namespace detail

/// Paths within A and within A^c share at most one node.
inline bool is_compatible_split(const Tree& t, const Split& a) {
  detail::check_split(a, t.num_leaves());
  const auto sa = t.spanned_nodes(a);
  const auto sb = t.spanned_nodes(detail::complement(a, t.num_leaves()));
  std::size_t shared = 0;
  for (auto v : sa) shared += sb.count(v);
  return shared <= 1;
}

/// Compatible splits, each given by the side containing leaf 1.
inline std::vector<Split> compatible_splits(const Tree& t) {
  std::vector<Split> out;
  for (auto& a : bipartitions(t.num_leaves()))
    if (is_compatible_split(t, a)) out.push_back(a);
  return out;
}

template <Scalar T>
struct TreeModelParams {
  Tree tree;
  std::vector<T> root_dist;
  /// Markov matrix per edge, keyed by the edge's child node name.
  std::map<std::string, Matrix<T>> markov;

  const Matrix<T>& matrix(const TreeEdge& e) const {
    const auto name = tree.edge_name(e);
    auto it = markov.find(name);
    if (it == markov.end()) throw std::invalid_argument("no Markov matrix for edge '" + name + "'");
    return it->second;
  }

  void validate(double tol = 1e-9) const {
    auto unit = [&](const T& s) {
      if constexpr (is_exact_v<T>) {
        return s == 1;
      } else {
        return std::fabs(s - 1.0) <= tol;
      }
    };
    if (root_dist.size() != 2 || root_dist[0] < 0 || root_dist[1] < 0 || !unit(root_dist[0] + root_dist[1]))
      throw std::invalid_argument("root distribution must be a probability vector of length 2");
    const auto es = tree.edges();
    if (markov.size() != es.size()) throw std::invalid_argument("need exactly one Markov matrix per edge");
    for (const auto& e : es) {
      const auto& m = matrix(e);
      if (m.rows() != 2 || m.cols() != 2) throw std::invalid_argument("Markov matrices must be 2x2");
      for (std::size_t i = 0; i < 2; ++i) {
        if (m(i, 0) < 0 || m(i, 1) < 0 || !unit(m(i, 0) + m(i, 1)))
          throw std::invalid_argument("Markov matrix for edge '" + tree.edge_name(e) + "' is not row-stochastic");
      }
    }
  }
};

namespace detail {

// Table F_v[s_v, leaves below v] with the leaf labels of its trailing axes.
template <Scalar T>
struct LeafTable {
  Tensor<T> table;
  std::vector<std::size_t> labels;
};

template <Scalar T>
LeafTable<T> leaf_table(const TreeModelParams<T>& prm, std::size_t v) {
  const auto& t = prm.tree;
  if (t.is_leaf(v)) return {Tensor<T>(Shape{2, 2}, {T(1), T(0), T(0), T(1)}), {*t.node(v).leaf}};
  LeafTable<T> acc{Tensor<T>(Shape{2}, {T(1), T(1)}), {}};
  for (auto c : t.children(v)) {
    auto sub = leaf_table(prm, c);
    // message: sum_{s'} M[s, s'] F_c[s', ...]
    const auto msg = axis_action(sub.table, 1, prm.matrix({v, c}).transposed());
    auto dims = acc.table.shape().dims();
    const std::size_t a = acc.table.size() / 2, b = msg.size() / 2;
    dims.insert(dims.end(), msg.shape().dims().begin() + 1, msg.shape().dims().end());
    std::vector<T> out(2 * a * b);
    for (std::size_t s = 0; s < 2; ++s)
      for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j) out[(s * a + i) * b + j] = acc.table[s * a + i] * msg[s * b + j];
    acc.table = Tensor<T>(Shape(dims), std::move(out));
    acc.labels.insert(acc.labels.end(), sub.labels.begin(), sub.labels.end());
  }
  return acc;
}

}  // namespace detail

/// Leaf distribution P[i_1, ..., i_n] by leafward sum-product.
template <Scalar T>
Tensor<T> joint_distribution(const TreeModelParams<T>& prm) {
  prm.validate();
  const auto lt = detail::leaf_table(prm, prm.tree.root());
  Matrix<T> pi(2, 1, {prm.root_dist[0], prm.root_dist[1]});
  auto p = axis_action(lt.table, 1, pi);
  // drop the singleton root axis, then order axes by leaf label
  std::vector<std::size_t> dims(p.shape().dims().begin() + 1, p.shape().dims().end());
  Tensor<T> q(Shape(dims), p.entries());
  std::vector<std::size_t> order(lt.labels.size());
  for (std::size_t k = 0; k < lt.labels.size(); ++k) order[lt.labels[k] - 1] = k + 1;
  return permute_axes(q, order);
}

struct MembershipResult {
  bool member = true;
  std::optional<Split> witness;
  std::size_t rank = 0;
};

/// Every flattening compatible with T has rank <= 2.
template <Scalar T>
MembershipResult variety_membership(const Tensor<T>& p, const Tree& t, double tol = kDefaultRankTol) {
  if (!(p.shape() == Shape(std::vector<std::size_t>(t.num_leaves(), 2))))
    throw std::invalid_argument("tensor shape does not match the tree's leaves");
  for (const auto& a : compatible_splits(t)) {
    const auto r = matrix_rank(flatten_matrix(p, a), tol);
    if (r > 2) return {false, a, r};
  }
  return {};
}

inline constexpr double kTreeBoundaryTol = 1e-7;

struct EdgeCheck {
  bool triggered = false;
  std::size_t rank_observed = 0;
};

/// Slice `slice_index` (a leaf state) of P at the pendant leaf, flattened
/// along the other branches at the internal endpoint, has rank <= 1.
template <Scalar T>
EdgeCheck boundary_pendant_check(const Tensor<T>& p, const Tree& t, const TreeEdge& e, std::size_t slice_index,
                                 double tol = kTreeBoundaryTol) {
  if (!t.is_pendant(e)) throw std::invalid_argument("edge '" + t.edge_name(e) + "' is not pendant");
  if (slice_index < 1 || slice_index > 2) throw std::out_of_range("slice index must be 1 or 2");
  const std::size_t leaf = t.is_leaf(e.child) ? e.child : e.parent;
  const std::size_t hub = leaf == e.child ? e.parent : e.child;
  const std::size_t ell = *t.node(leaf).leaf;
  const auto s = slice(p, ell, slice_index);
  // leaf groups L_2..L_r, renumbered to the slice's axes
  Partition groups;
  for (auto u : t.node(hub).nbrs) {
    if (u == leaf) continue;
    auto g = t.leaves_beyond(u, hub);
    for (auto& l : g)
      if (l > ell) --l;
    groups.push_back(std::move(g));
  }
  const auto q = flatten(s, groups);
  std::size_t rank;
  if (q.order() == 1)
    rank = q.is_zero() ? 0 : 1;
  else if (q.order() == 2)
    rank = matrix_rank(as_matrix(q), tol);
  else
    rank = flattening_rank(q, tol);
  return {rank <= 1, rank};
}

/// Splits compatible with T[e] but not with T.
inline std::vector<Split> contraction_splits(const Tree& t, const TreeEdge& e) {
  const auto te = t.contracted(e);
  std::vector<Split> out;
  for (auto& a : bipartitions(t.num_leaves()))
    if (is_compatible_split(te, a) && !is_compatible_split(t, a)) out.push_back(a);
  return out;
}

/// Every flattening compatible with T[e] but not T has rank <= 3.
template <Scalar T>
EdgeCheck boundary_internal_check(const Tensor<T>& p, const Tree& t, const TreeEdge& e,
                                  double tol = kTreeBoundaryTol) {
  if (t.is_pendant(e)) throw std::invalid_argument("edge '" + t.edge_name(e) + "' is pendant");
  std::size_t worst = 0;
  for (const auto& a : contraction_splits(t, e)) worst = std::max(worst, matrix_rank(flatten_matrix(p, a), tol));
  return {worst <= 3, worst};
}

struct TreeBoundaryEntry {
  std::string edge;
  /// "pendant_row_1", "pendant_row_2" (the slice index at the leaf) or "internal".
  std::string kind;
  bool triggered = false;
  std::size_t rank_observed = 0;
};

/// Two candidates per pendant edge and one per internal edge, in edge order.
template <Scalar T>
std::vector<TreeBoundaryEntry> boundary_report(const Tensor<T>& p, const Tree& t, double tol = kTreeBoundaryTol) {
  if (!variety_membership(p, t, kDefaultRankTol).member)
    throw std::domain_error("tensor is not on the phylogenetic variety of the tree");
  std::vector<TreeBoundaryEntry> out;
  for (const auto& e : t.edges()) {
    if (t.is_pendant(e)) {
      for (std::size_t k = 1; k <= 2; ++k) {
        const auto c = boundary_pendant_check(p, t, e, k, tol);
        out.push_back({t.edge_name(e), "pendant_row_" + std::to_string(k), c.triggered, c.rank_observed});
      }
    } else {
      const auto c = boundary_internal_check(p, t, e, tol);
      out.push_back({t.edge_name(e), "internal", c.triggered, c.rank_observed});
    }
  }
  return out;
}

struct SingularLocus {
  bool singular = false;
  /// "root", "edge:<name>" or empty.
  std::string reason;
};

template <Scalar T>
SingularLocus singular_locus_check(const TreeModelParams<T>& prm, double tol = kTreeBoundaryTol) {
  if (std::min(to_double(prm.root_dist[0]), to_double(prm.root_dist[1])) <= tol) return {true, "root"};
  for (const auto& e : prm.tree.edges()) {
    const auto& m = prm.matrix(e);
    if (std::fabs(to_double(det2(m(0, 0), m(0, 1), m(1, 0), m(1, 1)))) <= tol)
      return {true, "edge:" + prm.tree.edge_name(e)};
  }
  return {};
}

/// Same distribution, rooted at another internal node (Bayes reversal along the path).
template <Scalar T>
TreeModelParams<T> reroot(const TreeModelParams<T>& prm, std::size_t new_root) {
  TreeModelParams<T> cur = prm;
  while (cur.tree.root() != new_root) {
    // step the root one edge towards new_root
    const auto path_child = [&] {
      std::size_t v = new_root;
      while (*cur.tree.parent(v) != cur.tree.root()) v = *cur.tree.parent(v);
      return v;
    }();
    const std::size_t old_root = cur.tree.root();
    const auto m = cur.markov.at(cur.tree.node(path_child).name);
    const auto& pi = cur.root_dist;
    std::vector<T> pi2{pi[0] * m(0, 0) + pi[1] * m(1, 0), pi[0] * m(0, 1) + pi[1] * m(1, 1)};
    if (pi2[0] == 0 || pi2[1] == 0) throw std::domain_error("rerooting needs a positive marginal at the new root");
    Matrix<T> rev(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) rev(i, j) = m(j, i) * pi[j] / pi2[i];
    cur.markov.erase(cur.tree.node(path_child).name);
    cur.markov.emplace(cur.tree.node(old_root).name, rev);
    cur.root_dist = pi2;
    cur.tree = cur.tree.rerooted(path_child);
  }
  return cur;
}

/// Swaps the two states of an internal node; the distribution is unchanged.
template <Scalar T>
TreeModelParams<T> swap_labels(const TreeModelParams<T>& prm, std::size_t v) {
  if (prm.tree.is_leaf(v)) throw std::invalid_argument("label swap applies to internal nodes");
  TreeModelParams<T> out = prm;
  if (v == prm.tree.root()) {
    std::swap(out.root_dist[0], out.root_dist[1]);
  } else {
    auto& m = out.markov.at(prm.tree.node(v).name);
    for (std::size_t i = 0; i < 2; ++i) std::swap(m(i, 0), m(i, 1));
  }
  for (auto c : prm.tree.children(v)) {
    auto& m = out.markov.at(prm.tree.node(c).name);
    for (std::size_t j = 0; j < 2; ++j) std::swap(m(0, j), m(1, j));
  }
  return out;
}

}  // namespace nnrank
