#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace nnrank;
using Q = Rational;
using oracle::frac;

namespace {

const char* kStar3 = "(1,2,3)r;";
const char* kQuartet = "(1,2,(3,4)b)a;";
const char* kCaterpillar = "(1,2,(3,(4,5)c)b)a;";
const char* kRootedPair = "((1,2)x,(3,4)y)r;";

Matrix<Q> identity2() { return Matrix<Q>({{1, 0}, {0, 1}}); }
Matrix<Q> half2() { return Matrix<Q>({{frac(1, 2), frac(1, 2)}, {frac(1, 2), frac(1, 2)}}); }

TreeModelParams<Q> constant_params(const std::string& newick, const Matrix<Q>& m) {
  TreeModelParams<Q> prm;
  prm.tree = Tree::parse_newick(newick);
  prm.root_dist = {frac(1, 2), frac(1, 2)};
  for (const auto& e : prm.tree.edges()) prm.markov[prm.tree.edge_name(e)] = m;
  return prm;
}

std::size_t count_if_triggered(const std::vector<TreeBoundaryEntry>& r) {
  return std::count_if(r.begin(), r.end(), [](const auto& e) { return e.triggered; });
}

}  // namespace

// ---------------------------------------------------------------- trees

TEST(Newick, ParsesQuartet) {
  const auto t = Tree::parse_newick(kQuartet);
  EXPECT_EQ(t.num_leaves(), 4u);
  EXPECT_EQ(t.num_nodes(), 6u);
  EXPECT_EQ(t.node(t.root()).name, "a");
  EXPECT_EQ(t.edges().size(), 5u);
  std::size_t pendant = 0;
  for (const auto& e : t.edges()) pendant += t.is_pendant(e);
  EXPECT_EQ(pendant, 4u);
  EXPECT_EQ(*t.node(t.leaf_node(3)).leaf, 3u);
  EXPECT_EQ(t.newick(), kQuartet);
  EXPECT_EQ(Tree::parse_newick(" ( 1:0.5 , 2 ,(3, 4 ) b ) a ; ").newick(), kQuartet);
  EXPECT_THROW(t.find("zz"), std::invalid_argument);
}

TEST(Newick, RejectsMalformedTrees) {
  EXPECT_THROW(Tree::parse_newick("(1,2,3)r"), TreeParseError);
  EXPECT_THROW(Tree::parse_newick("(1,2,(3,4)r)r;"), TreeParseError);
  EXPECT_THROW(Tree::parse_newick("(1,2,4)r;"), TreeParseError);
  EXPECT_THROW(Tree::parse_newick("(1,2)r;"), TreeParseError);
  EXPECT_THROW(Tree::parse_newick("(1,2,((3,4)y)x)r;"), TreeParseError);
  EXPECT_THROW(Tree::parse_newick("(1,2,x)r;"), TreeParseError);
  EXPECT_THROW(Tree::parse_newick("(1,2,3;"), TreeParseError);
  EXPECT_NO_THROW(Tree::parse_newick(kRootedPair));
}

TEST(Splits, CompatibilityExamples) {
  const auto q = Tree::parse_newick(kQuartet);
  EXPECT_TRUE(is_compatible_split(q, {1, 2}));
  EXPECT_TRUE(is_compatible_split(q, {3, 4}));
  EXPECT_FALSE(is_compatible_split(q, {1, 3}));
  EXPECT_FALSE(is_compatible_split(q, {1, 4}));
  for (std::size_t l = 1; l <= 4; ++l) EXPECT_TRUE(is_compatible_split(q, {l}));
  EXPECT_EQ(compatible_splits(q).size(), 5u);
  // on a star every pair of leaf paths meets only at the centre
  EXPECT_EQ(compatible_splits(Tree::parse_newick("(1,2,3,4)r;")).size(), 7u);
  EXPECT_THROW(is_compatible_split(q, {}), std::invalid_argument);
  EXPECT_THROW(is_compatible_split(q, {1, 2, 3, 4}), std::invalid_argument);
  EXPECT_THROW(is_compatible_split(q, {5}), std::invalid_argument);
}

TEST(Splits, ContractionCoarsensTheTree) {
  const auto q = Tree::parse_newick(kQuartet);
  const auto internal = q.edge("b");
  const auto star = q.contracted(internal);
  EXPECT_EQ(star.num_nodes(), 5u);
  EXPECT_EQ(star.node(star.root()).nbrs.size(), 4u);
  EXPECT_EQ(contraction_splits(q, internal), (std::vector<Split>{{1, 3}, {1, 4}}));
  EXPECT_THROW(q.contracted(q.edge("1")), std::invalid_argument);

  const auto cat = Tree::parse_newick(kCaterpillar);
  const auto merged = cat.contracted(cat.edge("b"));
  std::size_t four_valent = 0;
  for (std::size_t v = 0; v < merged.num_nodes(); ++v) four_valent += merged.node(v).nbrs.size() == 4;
  EXPECT_EQ(four_valent, 1u);
  // every split of the coarser tree that T lacks is one the internal check uses
  for (const auto& a : contraction_splits(cat, cat.edge("b"))) {
    EXPECT_TRUE(is_compatible_split(merged, a));
    EXPECT_FALSE(is_compatible_split(cat, a));
  }
  for (const auto& a : compatible_splits(cat)) EXPECT_TRUE(is_compatible_split(merged, a));
}

// ---------------------------------------------------------------- parametrization

TEST(JointDistribution, Examples) {
  const auto star = joint_distribution(constant_params(kStar3, identity2()));
  for (const auto& idx : oracle::indices({2, 2, 2})) {
    const bool diag = idx[0] == idx[1] && idx[1] == idx[2];
    EXPECT_EQ(star(idx), diag ? frac(1, 2) : Q(0));
  }
  for (const char* nw : {kStar3, kQuartet, kCaterpillar, kRootedPair}) {
    const auto p = joint_distribution(constant_params(nw, half2()));
    for (const auto& x : p.entries()) EXPECT_EQ(x, Q(1) / Q(p.size()));
  }
  const auto q = joint_distribution(constant_params(kQuartet, identity2()));
  EXPECT_EQ(q({1, 1, 1, 1}), frac(1, 2));
  EXPECT_EQ(q({2, 2, 2, 2}), frac(1, 2));
  EXPECT_EQ(q.sum(), 1);
}

TEST(JointDistribution, MatchesBruteForceOracle) {
  oracle::Rng rng(31);
  for (const char* nw : {kStar3, kQuartet, kCaterpillar, kRootedPair, "((1,2)x,3,(4,(5,6)z)y)r;"})
    for (int trial = 0; trial < 10; ++trial) {
      const auto prm = oracle::tree_params(rng, nw);
      const auto p = joint_distribution(prm);
      ASSERT_EQ(p, oracle::tree_joint(prm)) << nw;
      ASSERT_EQ(p.sum(), 1);
    }
}

TEST(JointDistribution, ValidatesParameters) {
  auto prm = constant_params(kQuartet, identity2());
  prm.markov["3"] = Matrix<Q>({{frac(1, 2), frac(1, 3)}, {0, 1}});
  EXPECT_THROW(joint_distribution(prm), std::invalid_argument);
  prm = constant_params(kQuartet, identity2());
  prm.root_dist = {frac(1, 2), frac(1, 3)};
  EXPECT_THROW(joint_distribution(prm), std::invalid_argument);
  prm = constant_params(kQuartet, identity2());
  prm.markov.erase("b");
  EXPECT_THROW(joint_distribution(prm), std::invalid_argument);
}

TEST(JointDistribution, StarTreeIsTheRankTwoModel) {
  oracle::Rng rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const auto prm = oracle::tree_params(rng, kStar3);
    Rank2Decomposition<Q> d;
    d.shape = Shape{2, 2, 2};
    d.s = prm.root_dist[0];
    d.t = prm.root_dist[1];
    for (std::size_t l = 1; l <= 3; ++l) {
      const auto& m = prm.markov.at(std::to_string(l));
      d.a.push_back({m(0, 0), m(0, 1)});
      d.b.push_back({m(1, 0), m(1, 1)});
    }
    ASSERT_EQ(joint_distribution(prm), tensor_from_rank2(d));
  }
}

TEST(JointDistribution, ModelPointsAreSupermodular) {
  oracle::Rng rng(33);
  for (const char* nw : {kQuartet, kCaterpillar})
    for (int trial = 0; trial < 10; ++trial) {
      const auto p = joint_distribution(oracle::tree_params(rng, nw));
      ASSERT_TRUE(find_pi(p).has_value());
    }
}

TEST(JointDistribution, RootInvariance) {
  oracle::Rng rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const auto prm = oracle::tree_params(rng, kCaterpillar);
    const auto p = joint_distribution(prm);
    for (const char* v : {"b", "c"}) {
      const auto moved = reroot(prm, prm.tree.find(v));
      ASSERT_EQ(moved.tree.node(moved.tree.root()).name, v);
      ASSERT_EQ(joint_distribution(moved), p);
    }
  }
  const auto prm = constant_params(kQuartet, identity2());
  EXPECT_THROW(reroot(prm, prm.tree.leaf_node(1)), std::invalid_argument);
}

TEST(JointDistribution, LabelSwapFiber) {
  oracle::Rng rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    const auto prm = oracle::tree_params(rng, kCaterpillar);
    const auto p = joint_distribution(prm);
    for (const char* v : {"a", "b", "c"}) ASSERT_EQ(joint_distribution(swap_labels(prm, prm.tree.find(v))), p);
    // all internal nodes at once
    auto all = prm;
    for (const char* v : {"a", "b", "c"}) all = swap_labels(all, all.tree.find(v));
    ASSERT_EQ(joint_distribution(all), p);
    ASSERT_NE(all.root_dist, prm.root_dist);
  }
}

TEST(JointDistribution, DimensionIsTwoEdgesPlusOne) {
  auto jacobian = [](const std::string& nw) {
    const auto tree = Tree::parse_newick(nw);
    const auto edges = tree.edges();
    const ParamMap f = [&](const std::vector<double>& th) {
      TreeModelParams<double> prm;
      prm.tree = tree;
      prm.root_dist = {th[0], 1 - th[0]};
      for (std::size_t k = 0; k < edges.size(); ++k)
        prm.markov[tree.edge_name(edges[k])] = Matrix<double>({{th[1 + 2 * k], 1 - th[1 + 2 * k]}, {th[2 + 2 * k], 1 - th[2 + 2 * k]}});
      return joint_distribution(prm).entries();
    };
    oracle::Rng rng(36);
    std::vector<double> theta{rng.uniform(0.3, 0.7)};
    for (std::size_t k = 0; k < edges.size(); ++k) {
      theta.push_back(rng.uniform(0.6, 0.9));
      theta.push_back(rng.uniform(0.1, 0.4));
    }
    return numeric_jacobian_rank(f, theta);
  };
  EXPECT_EQ(jacobian(kStar3), 7u);
  EXPECT_EQ(jacobian(kQuartet), 11u);
}

// ---------------------------------------------------------------- membership

TEST(Membership, Examples) {
  oracle::Rng rng(37);
  const auto q = Tree::parse_newick(kQuartet);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = variety_membership(joint_distribution(oracle::tree_params(rng, kQuartet)), q);
    EXPECT_TRUE(m.member);
    EXPECT_FALSE(m.witness);
  }
  const auto bad = variety_membership(oracle::random_positive(rng, {2, 2, 2, 2}), q);
  EXPECT_FALSE(bad.member);
  EXPECT_EQ(bad.witness, (Split{1, 2}));
  EXPECT_EQ(bad.rank, 4u);
  for (const char* nw : {kStar3, kQuartet, kCaterpillar}) {
    const auto t = Tree::parse_newick(nw);
    const auto uniform = Tensor<Q>::filled(Shape(std::vector<std::size_t>(t.num_leaves(), 2)), 1);
    EXPECT_TRUE(variety_membership(uniform, t).member);
  }
  EXPECT_THROW(variety_membership(Tensor<Q>::filled(Shape{2, 2, 2}, 1), q), std::invalid_argument);
}

TEST(Membership, CompatibleAndIncompatibleFlatteningRanks) {
  oracle::Rng rng(38);
  const auto q = Tree::parse_newick(kQuartet);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = joint_distribution(oracle::tree_params(rng, kQuartet));
    for (const auto& a : compatible_splits(q)) ASSERT_LE(oracle::rank(oracle::flattening(p, a)), 2u);
    ASSERT_EQ(oracle::rank(oracle::flattening(p, {1, 3})), 4u);
    ASSERT_EQ(matrix_rank(flatten_matrix(to_double(p), {1, 4})), 4u);
  }
}

// ---------------------------------------------------------------- boundary

TEST(Boundary, PendantExamples) {
  oracle::Rng rng(39);
  const auto q = Tree::parse_newick(kQuartet);
  for (int trial = 0; trial < 10; ++trial) {
    auto prm = oracle::tree_params(rng, kQuartet);
    const auto generic = joint_distribution(prm);
    for (const auto& e : q.edges())
      if (q.is_pendant(e))
        for (std::size_t k = 1; k <= 2; ++k) ASSERT_FALSE(boundary_pendant_check(generic, q, e, k).triggered);

    // a zero in column 2 of M_1 kills one term of the leaf-1 slice at state 2
    const std::size_t row = 1 + trial % 2;
    prm.markov["1"](row - 1, 0) = 1;
    prm.markov["1"](row - 1, 1) = 0;
    const auto p = joint_distribution(prm);
    EXPECT_TRUE(boundary_pendant_check(p, q, q.edge("1"), 2).triggered);
    EXPECT_FALSE(boundary_pendant_check(p, q, q.edge("1"), 1).triggered);

    // the 2x4 matrix [p_1jkl] with rows j and columns kl
    std::vector<std::vector<Q>> m(2, std::vector<Q>(4));
    for (const auto& idx : oracle::indices({2, 2, 2, 2}))
      if (idx[0] == 2) m[idx[1] - 1][(idx[2] - 1) * 2 + idx[3] - 1] = p(idx);
    EXPECT_EQ(oracle::rank(m), 1u);
  }
  EXPECT_THROW(boundary_pendant_check(Tensor<Q>::filled(Shape{2, 2, 2, 2}, 1), q, q.edge("b"), 1), std::invalid_argument);
}

TEST(Boundary, InternalExamples) {
  oracle::Rng rng(40);
  const auto q = Tree::parse_newick(kQuartet);
  for (int trial = 0; trial < 10; ++trial) {
    auto prm = oracle::tree_params(rng, kQuartet);
    const auto generic = joint_distribution(prm);
    EXPECT_FALSE(boundary_internal_check(generic, q, q.edge("b")).triggered);
    EXPECT_EQ(boundary_internal_check(generic, q, q.edge("b")).rank_observed, 4u);
    // the two incompatible 4x4 determinants agree on the model
    const auto m13 = flatten_matrix(generic, {1, 3}), m14 = flatten_matrix(generic, {1, 4});
    ASSERT_EQ(determinant(m13), determinant(m14));

    const std::size_t i = trial % 2, j = trial / 2 % 2;
    prm.markov["b"](i, j) = 0;
    prm.markov["b"](i, 1 - j) = 1;
    const auto p = joint_distribution(prm);
    const auto c = boundary_internal_check(p, q, q.edge("b"));
    EXPECT_TRUE(c.triggered);
    EXPECT_LE(c.rank_observed, 3u);
  }
  EXPECT_THROW(boundary_internal_check(Tensor<Q>::filled(Shape{2, 2, 2, 2}, 1), q, q.edge("1")), std::invalid_argument);
}

TEST(Boundary, ReportCountsAndGenericPoints) {
  oracle::Rng rng(41);
  for (const char* nw : {kStar3, kQuartet, kCaterpillar}) {
    const auto prm = oracle::tree_params(rng, nw);
    const auto r = boundary_report(joint_distribution(prm), prm.tree);
    const std::size_t n = prm.tree.num_leaves(), edges = prm.tree.edges().size();
    EXPECT_EQ(r.size(), n + edges);
    EXPECT_EQ(count_if_triggered(r), 0u);
  }
  const auto q = Tree::parse_newick(kQuartet);
  EXPECT_EQ(boundary_report(joint_distribution(oracle::tree_params(rng, kQuartet)), q).size(), 9u);
  EXPECT_EQ(boundary_report(joint_distribution(oracle::tree_params(rng, kStar3)), Tree::parse_newick(kStar3)).size(), 6u);
  EXPECT_THROW(boundary_report(oracle::random_positive(rng, {2, 2, 2, 2}), q), std::domain_error);
}

TEST(Boundary, ReportFlagsExactlyTheDegeneratedParameter) {
  oracle::Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    auto prm = oracle::tree_params(rng, kQuartet);
    prm.markov["3"](0, 1) = 0;
    prm.markov["3"](0, 0) = 1;
    const auto r = boundary_report(to_double(joint_distribution(prm)), prm.tree);
    ASSERT_EQ(count_if_triggered(r), 1u);
    for (const auto& e : r)
      if (e.triggered) {
        EXPECT_EQ(e.edge, "3");
        EXPECT_EQ(e.kind, "pendant_row_2");
      }
  }
}

TEST(SingularLocus, Examples) {
  oracle::Rng rng(43);
  auto prm = oracle::tree_params(rng, kQuartet);
  EXPECT_FALSE(singular_locus_check(prm).singular);
  auto rooted = prm;
  rooted.root_dist = {1, 0};
  const auto r = singular_locus_check(rooted);
  EXPECT_TRUE(r.singular);
  EXPECT_EQ(r.reason, "root");
  prm.markov["b"] = half2();
  const auto e = singular_locus_check(prm);
  EXPECT_TRUE(e.singular);
  EXPECT_EQ(e.reason, "edge:b");
}
