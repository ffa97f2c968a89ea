#pragma once

// JSON interchange for tensors, certificates, decompositions, trees and reports.
//
//   tensor:  {"shape":[2,2,2], "mode":"exact", "entries":["1/8", "0", ...]}
//   tree:    {"newick":"((1,2)a,(3,4)b)r;", "root":"r", "root_dist":[...],
//             "markov":{"a":[[..],[..]], ...}}
//
// Entries are row-major with the last index fastest. Exact entries are strings
// "p/q" or "p"; float entries are numbers.

#include "nnrank/case_studies.hpp"
#include "nnrank/rank2.hpp"
#include "nnrank/supermodular.hpp"
#include "nnrank/tree.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <variant>

namespace nnrank {

using json = nlohmann::json;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using AnyTensor = std::variant<Tensor<Rational>, Tensor<double>>;

// ---------------------------------------------------------------- scalars

inline json scalar_to_json(const Rational& q) { return format_rational(q); }
inline json scalar_to_json(double x) { return x; }

template <Scalar T>
T scalar_from_json(const json& j) {
  try {
    if constexpr (is_exact_v<T>) {
      if (j.is_string()) return parse_rational(j.get<std::string>());
      if (j.is_number_integer()) return Rational(j.get<long>());
      if (j.is_number()) return from_double<Rational>(j.get<double>());
    } else {
      if (j.is_number()) return j.get<double>();
      if (j.is_string()) return parse_rational(j.get<std::string>()).get_d();
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  throw ParseError("expected a number or rational string, got " + j.dump());
}

template <Scalar T>
json vector_to_json(const std::vector<T>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(scalar_to_json(x));
  return out;
}

template <Scalar T>
std::vector<T> vector_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("expected an array, got " + j.dump());
  std::vector<T> out;
  for (const auto& x : j) out.push_back(scalar_from_json<T>(x));
  return out;
}

template <Scalar T>
json matrix_to_json(const Matrix<T>& m) {
  json out = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(scalar_to_json(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

template <Scalar T>
Matrix<T> matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("expected a nonempty array of rows");
  const std::size_t rows = j.size(), cols = j[0].size();
  std::vector<T> entries;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) throw ParseError("matrix rows have unequal lengths");
    for (const auto& x : row) entries.push_back(scalar_from_json<T>(x));
  }
  return Matrix<T>(rows, cols, std::move(entries));
}

// ---------------------------------------------------------------- tensors

template <Scalar T>
json tensor_to_json(const Tensor<T>& p) {
  return {{"shape", p.shape().dims()}, {"mode", is_exact_v<T> ? "exact" : "float"}, {"entries", vector_to_json(p.entries())}};
}

inline Mode tensor_mode(const json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("entries"))
    throw ParseError("tensor JSON needs \"shape\" and \"entries\"");
  const std::string mode = j.value("mode", "exact");
  if (mode == "exact") return Mode::exact;
  if (mode == "float") return Mode::floating;
  throw ParseError("unknown mode '" + mode + "'");
}

/// Reads the tensor in the requested scalar type regardless of the file's mode.
template <Scalar T>
Tensor<T> tensor_from_json(const json& j) {
  tensor_mode(j);
  std::vector<std::size_t> dims;
  try {
    dims = j.at("shape").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad shape: ") + e.what());
  }
  try {
    return Tensor<T>(Shape(dims), vector_from_json<T>(j.at("entries")));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(e.what());
  }
}

inline AnyTensor any_tensor_from_json(const json& j) {
  if (tensor_mode(j) == Mode::exact) return tensor_from_json<Rational>(j);
  return tensor_from_json<double>(j);
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------- supermodularity

inline json to_json(const PermutationTuple& pi) { return pi.perms(); }

inline PermutationTuple permutation_tuple_from_json(const json& j) {
  try {
    return PermutationTuple(j.get<std::vector<std::vector<std::size_t>>>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad permutation tuple: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

inline json to_json(const ViolationWitness& w) { return {{"i", w.i}, {"j", w.j}, {"k", w.k}, {"l", w.l}}; }

inline json to_json(const SupermodularCertificate& c) {
  json out = {{"pass", c.pass}, {"pi", to_json(c.pi)}, {"comparisons", c.comparisons}};
  out["witness"] = c.witness ? to_json(*c.witness) : json(nullptr);
  return out;
}

// ---------------------------------------------------------------- rank 2

inline json to_json(const DecisionResult& r) {
  json out = {{"verdict", r.in_model ? "in-model" : "not-in-model"},
              {"reason", std::string(to_string(r.reason))},
              {"flattening_rank", r.flattening_rank},
              {"rank_witness", r.rank_witness}};
  out["pi"] = r.pi ? to_json(*r.pi) : json(nullptr);
  out["violation"] = r.violation ? to_json(*r.violation) : json(nullptr);
  return out;
}

template <Scalar T>
json to_json(const Rank2Decomposition<T>& d) {
  json a = json::array(), b = json::array();
  for (const auto& v : d.a) a.push_back(vector_to_json(v));
  for (const auto& v : d.b) b.push_back(vector_to_json(v));
  return {{"shape", d.shape.dims()}, {"s", scalar_to_json(d.s)}, {"t", scalar_to_json(d.t)}, {"a", a}, {"b", b}};
}

inline json to_json(const BoundaryComponent& c) {
  if (c.kind == BoundaryComponent::Kind::slice_rank_one)
    return {{"kind", "slice_rank_one"}, {"axis", c.axis}, {"index", c.i}};
  return {{"kind", "double_slice_dependent"}, {"axis", c.axis}, {"i", c.i}, {"j", c.j}};
}

inline json to_json(const std::vector<BoundaryComponent>& cs) {
  json out = json::array();
  for (const auto& c : cs) out.push_back(to_json(c));
  return out;
}

// ---------------------------------------------------------------- trees

template <Scalar T>
TreeModelParams<T> tree_params_from_json(const json& j) {
  if (!j.is_object() || !j.contains("newick")) throw ParseError("tree JSON needs \"newick\"");
  TreeModelParams<T> prm;
  try {
    prm.tree = Tree::parse_newick(j.at("newick").get<std::string>());
    if (j.contains("root")) {
      const auto name = j.at("root").get<std::string>();
      if (name != prm.tree.node(prm.tree.root()).name) prm.tree = prm.tree.rerooted(prm.tree.find(name));
    }
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  } catch (const std::out_of_range& e) {
    throw ParseError(e.what());
  }
  if (j.contains("root_dist")) prm.root_dist = vector_from_json<T>(j.at("root_dist"));
  if (j.contains("markov")) {
    if (!j.at("markov").is_object()) throw ParseError("\"markov\" must map edge names to matrices");
    for (const auto& [edge, m] : j.at("markov").items()) prm.markov.emplace(edge, matrix_from_json<T>(m));
  }
  return prm;
}

template <Scalar T>
json to_json(const TreeModelParams<T>& prm) {
  json markov = json::object();
  for (const auto& [edge, m] : prm.markov) markov[edge] = matrix_to_json(m);
  return {{"newick", prm.tree.newick()},
          {"root", prm.tree.node(prm.tree.root()).name},
          {"root_dist", vector_to_json(prm.root_dist)},
          {"markov", markov}};
}

inline json to_json(const MembershipResult& m) {
  json out = {{"member", m.member}, {"rank", m.rank}};
  out["witness"] = m.witness ? json(*m.witness) : json(nullptr);
  return out;
}

inline json to_json(const std::vector<TreeBoundaryEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries)
    out.push_back({{"edge", e.edge}, {"kind", e.kind}, {"triggered", e.triggered}, {"rank_observed", e.rank_observed}});
  return out;
}

// ---------------------------------------------------------------- case studies

inline json complex_to_json(const std::complex<double>& z) {
  if (z.imag() == 0.0) return z.real();
  return {{"re", z.real()}, {"im", z.imag()}};
}

template <Scalar T>
json to_json(const Rank3Params332<T>& q) {
  return {{"pi", vector_to_json(q.pi)}, {"a1", vector_to_json(q.a1)}, {"a2", vector_to_json(q.a2)},
          {"a3", vector_to_json(q.a3)}, {"b1", vector_to_json(q.b1)}, {"b2", vector_to_json(q.b2)},
          {"b3", vector_to_json(q.b3)}, {"c1", vector_to_json(q.c1)}, {"c2", vector_to_json(q.c2)},
          {"c3", vector_to_json(q.c3)}};
}

template <Scalar T>
Rank3Params332<T> rank3_params_from_json(const json& j) {
  Rank3Params332<T> q;
  auto get = [&](const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("missing \"") + key + "\"");
    return vector_from_json<T>(j.at(key));
  };
  q.pi = get("pi");
  q.a1 = get("a1");
  q.a2 = get("a2");
  q.a3 = get("a3");
  q.b1 = get("b1");
  q.b2 = get("b2");
  q.b3 = get("b3");
  q.c1 = get("c1");
  q.c2 = get("c2");
  q.c3 = get("c3");
  return q;
}

inline json to_json(const EigenMembershipReport& r) {
  json ev1 = json::array(), ev2 = json::array();
  for (const auto& z : r.eigenvalues_1) ev1.push_back(complex_to_json(z));
  for (const auto& z : r.eigenvalues_2) ev2.push_back(complex_to_json(z));
  json out = {{"verdict", r.pass ? "in-model" : "not-in-model"},
              {"eigenvalues", {ev1, ev2}},
              {"eigenvectors", {r.eigenvectors_1, r.eigenvectors_2}},
              {"diagnostics", r.diagnostics},
              {"reconstruction_error", r.reconstruction_error}};
  out["decomposition"] = r.decomposition ? to_json(*r.decomposition) : json(nullptr);
  return out;
}

inline json to_json(const Boundary332& b) { return {{"components", b.components}, {"diagnostics", b.diagnostics}}; }

inline json to_json(const Membership2222& m) { return {{"member", m.member}, {"relative_determinants", m.relative_dets}}; }

}  // namespace nnrank
