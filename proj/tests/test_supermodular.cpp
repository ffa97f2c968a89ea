#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace nnrank;
using Q = Rational;

namespace {

Tensor<Q> t9553() { return Tensor<Q>(Shape{2, 2, 2}, {9, 5, 5, 3, 5, 3, 3, 2}); }
Tensor<Q> parity() { return Tensor<Q>(Shape{2, 2, 2}, {1, 0, 0, 1, 0, 1, 1, 0}); }

PermutationTuple tuple(std::vector<std::vector<std::size_t>> p) { return PermutationTuple(std::move(p)); }

/// Random permutation tuple, not necessarily canonical.
PermutationTuple random_tuple(oracle::Rng& rng, const Shape& shape) {
  std::vector<std::vector<std::size_t>> perms;
  for (auto d : shape.dims()) {
    std::vector<std::size_t> p(d);
    for (std::size_t k = 0; k < d; ++k) p[k] = k + 1;
    std::shuffle(p.begin(), p.end(), rng.engine());
    perms.push_back(std::move(p));
  }
  return PermutationTuple(std::move(perms));
}

/// A strictly supermodular positive tensor under the identity: p_i = exp(sum_{r<s} c_rs i_r i_s + noise_i)
/// with the pairwise coefficients dominating, rounded to rationals.
Tensor<Q> strictly_supermodular(oracle::Rng& rng, const std::vector<std::size_t>& dims) {
  const auto idx = oracle::indices(dims);
  std::vector<Q> e;
  for (const auto& i : idx) {
    double s = 0;
    for (std::size_t r = 0; r < dims.size(); ++r)
      for (std::size_t q = r + 1; q < dims.size(); ++q) s += 0.7 * double(i[r]) * double(i[q]);
    s += 0.05 * rng.uniform();
    e.push_back(from_double<Q>(std::exp(s - 3.0)));
  }
  return Tensor<Q>(Shape(dims), e);
}

}  // namespace

TEST(PermutationTuple, ValidatesAndPrints) {
  EXPECT_THROW(tuple({{1, 1}}), std::invalid_argument);
  EXPECT_THROW(tuple({{1, 3}}), std::invalid_argument);
  const auto pi = tuple({{1, 2}, {2, 1}});
  EXPECT_EQ(pi.to_string(), "[[1,2],[2,1]]");
  EXPECT_EQ(pi(2, 1), 2u);
  EXPECT_EQ(pi.reversed(), tuple({{2, 1}, {1, 2}}));
  EXPECT_EQ(pi.canonical(), pi);
  EXPECT_EQ(tuple({{2, 1}, {1, 2}}).canonical(), pi);
  EXPECT_EQ(tuple({{2, 3, 1}}).inverse(), tuple({{3, 1, 2}}));
}

TEST(PiMeetJoin, Examples) {
  const auto id = PermutationTuple::identity(Shape{2, 2, 2});
  EXPECT_EQ(pi_meet({1, 2, 1}, {2, 1, 1}, id), (MultiIndex{1, 1, 1}));
  EXPECT_EQ(pi_join({1, 2, 1}, {2, 1, 1}, id), (MultiIndex{2, 2, 1}));
  EXPECT_EQ(pi_meet({1, 2, 2}, {1, 2, 2}, id), (MultiIndex{1, 2, 2}));
  EXPECT_EQ(pi_join({1, 2, 2}, {1, 2, 2}, id), (MultiIndex{1, 2, 2}));
  const auto pi = tuple({{2, 1, 3}});
  EXPECT_EQ(pi_meet({1}, {2}, pi), (MultiIndex{2}));
  EXPECT_EQ(pi_join({1}, {2}, pi), (MultiIndex{1}));
  EXPECT_THROW(pi_meet({1, 2}, {1}, pi), std::invalid_argument);
}

TEST(FullCheck, Examples) {
  oracle::Rng rng(1);
  const auto ones = Tensor<Q>::filled(Shape{3, 2, 3}, 1);
  EXPECT_TRUE(is_pi_supermodular_full(ones, random_tuple(rng, ones.shape())).pass);
  EXPECT_TRUE(is_pi_supermodular_full(t9553(), PermutationTuple::identity(Shape{2, 2, 2})).pass);

  const auto cert = is_pi_supermodular_full(parity(), PermutationTuple::identity(Shape{2, 2, 2}));
  ASSERT_FALSE(cert.pass);
  ASSERT_TRUE(cert.witness);
  const auto& w = *cert.witness;
  const auto p = parity();
  EXPECT_GT(p(w.i) * p(w.j), p(w.k) * p(w.l));
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(std::min(w.i[r], w.j[r]), w.k[r]);
    EXPECT_EQ(std::max(w.i[r], w.j[r]), w.l[r]);
  }
  EXPECT_THROW(is_pi_supermodular_full(Tensor<Q>(Shape{2, 2}, {1, -1, 0, 1}), PermutationTuple::identity(Shape{2, 2})),
               std::domain_error);
}

TEST(FullCheck, AgreesWithBruteForceOracle) {
  oracle::Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const std::vector<std::size_t> dims{std::size_t(rng.integer(2, 3)), 2, std::size_t(rng.integer(2, 3))};
    Tensor<Q> p = trial % 2 ? oracle::rank2_draw(rng, dims).p : oracle::random_positive(rng, dims, 5);
    if (trial % 5 == 0) p.entries()[rng.integer(0, p.size() - 1)] = 0;
    const auto pi = random_tuple(rng, p.shape());
    ASSERT_EQ(is_pi_supermodular_full(p, pi).pass, oracle::supermodular(p, pi.perms())) << pi.to_string();
  }
}

TEST(FacetCheck, Examples) {
  EXPECT_TRUE(is_pi_supermodular_facets(t9553(), PermutationTuple::identity(Shape{2, 2, 2})).pass);
  EXPECT_TRUE(is_pi_supermodular_facets(Tensor<Q>::filled(Shape{2, 3}, 2), PermutationTuple::identity(Shape{2, 3})).pass);
  EXPECT_FALSE(is_pi_supermodular_facets(Tensor<Q>(Shape{2, 2}, {1, 2, 3, 1}), PermutationTuple::identity(Shape{2, 2})).pass);
  EXPECT_THROW(is_pi_supermodular_facets(parity(), PermutationTuple::identity(Shape{2, 2, 2})), std::domain_error);
}

TEST(FacetCheck, BinaryComparisonCount) {
  const std::vector<std::uint64_t> expected{6, 24, 80, 240, 672, 1792};
  for (std::size_t n = 3; n <= 8; ++n) {
    EXPECT_EQ(facet_count_binary(n), expected[n - 3]);
    const auto p = Tensor<Q>::filled(Shape(std::vector<std::size_t>(n, 2)), 1);
    EXPECT_EQ(is_pi_supermodular_facets(p, PermutationTuple::identity(p.shape())).comparisons, expected[n - 3]);
  }
  EXPECT_THROW(facet_count_binary(2), std::invalid_argument);
}

TEST(FacetCheck, AgreesWithFullCheckOnPositiveTensors) {
  oracle::Rng rng(3);
  const std::vector<std::vector<std::size_t>> shapes{{2, 2, 2}, {3, 2, 2}, {3, 3, 2}, {2, 2, 2, 2}, {3, 3, 2, 2}};
  for (const auto& dims : shapes)
    for (int trial = 0; trial < 60; ++trial) {
      Tensor<Q> p = trial % 3 == 0   ? oracle::random_positive(rng, dims, 6)
                    : trial % 3 == 1 ? oracle::rank2_draw(rng, dims).p
                                     : strictly_supermodular(rng, dims);
      const auto pi = trial % 2 ? random_tuple(rng, p.shape()) : PermutationTuple::identity(p.shape());
      ASSERT_EQ(is_pi_supermodular_facets(p, pi).pass, is_pi_supermodular_full(p, pi).pass);
    }
}

TEST(FindPi, Examples) {
  EXPECT_EQ(find_pi(oracle::outer_product<Q>({{1, 2}, {3, 1, 1}, {2, 5}})),
            PermutationTuple::identity(Shape{2, 3, 2}));
  EXPECT_EQ(find_pi(t9553()), PermutationTuple::identity(Shape{2, 2, 2}));
  EXPECT_FALSE(find_pi(parity()).has_value());
}

TEST(FindPi, ReturnsSmallestPassingCanonicalTuple) {
  oracle::Rng rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = oracle::rank2_draw(rng, {3, 2, 2}).p;
    const auto pi = find_pi(p);
    ASSERT_TRUE(pi);
    ASSERT_TRUE(pi->is_canonical());
    for (const auto& t : canonical_tuples(p.shape())) {
      if (t == *pi) break;
      ASSERT_FALSE(oracle::supermodular(p, t.perms()));
    }
  }
}

TEST(FindPi, ParallelMatchesSequential) {
  oracle::Rng rng(5);
  SupermodularOptions par;
  par.parallel = true;
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = trial % 2 ? oracle::rank2_draw(rng, {3, 3, 2}).p : oracle::random_positive(rng, {3, 3, 2}, 4);
    ASSERT_EQ(find_pi(p), find_pi(p, par));
    ASSERT_EQ(toric_cells(p), toric_cells(p, par));
  }
}

TEST(FindPi, TooLargeSearchIsRefused) {
  SupermodularOptions opt;
  opt.max_cells = 10;
  EXPECT_THROW(find_pi(Tensor<Q>::filled(Shape{3, 3, 3}, 1), opt), SearchTooLarge);
}

TEST(ToricCells, Examples) {
  EXPECT_EQ(toric_cell_count(Shape{3, 3, 3}), 108u);
  EXPECT_EQ(toric_cells(Tensor<Q>::filled(Shape{3, 3, 3}, 1)).size(), 108u);
  oracle::Rng rng(6);
  EXPECT_EQ(toric_cells(strictly_supermodular(rng, {3, 3, 3})).size(), 1u);
  EXPECT_TRUE(toric_cells(parity()).empty());
}

TEST(ToricCells, EveryNonnegativeRankTwoTensorHasACell) {
  oracle::Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = oracle::rank2_draw(rng, {2, 3, 2});
    ASSERT_FALSE(toric_cells(d.p).empty());
  }
}

TEST(Equivariance, RelabelledTensorPassesUnderIdentity) {
  oracle::Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = trial % 2 ? oracle::rank2_draw(rng, {3, 2, 3}).p : oracle::random_positive(rng, {3, 2, 3}, 4);
    const auto pi = random_tuple(rng, p.shape());
    const auto moved = relabel(p, pi);
    ASSERT_EQ(is_pi_supermodular_full(p, pi).pass,
              is_pi_supermodular_full(moved, PermutationTuple::identity(p.shape())).pass);
    ASSERT_EQ(is_pi_supermodular_full(p, pi).pass, is_pi_supermodular_full(p, pi.reversed()).pass);
  }
}

TEST(Closure, MarginalizationKeepsSupermodularity) {
  oracle::Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = oracle::rank2_draw(rng, {3, 2, 2, 2}).p;
    const auto pi = find_pi(p);
    ASSERT_TRUE(pi);
    for (std::size_t r = 1; r <= 4; ++r) ASSERT_TRUE(is_pi_supermodular_full(marginalize(p, r), pi->without_axis(r)).pass);
  }
}

TEST(Closure, FlatteningsPassInducedCheckAndHaveACell) {
  oracle::Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = oracle::rank2_draw(rng, {2, 3, 2}).p;
    const auto pi = find_pi(p);
    ASSERT_TRUE(pi);
    for (const auto& a : bipartitions(3)) {
      Partition blocks{a, {}};
      for (std::size_t r = 1; r <= 3; ++r)
        if (std::find(a.begin(), a.end(), r) == a.end()) blocks[1].push_back(r);
      const auto q = flatten(p, blocks);
      ASSERT_TRUE(is_supermodular_induced(q, p.shape(), blocks, *pi).pass);
      ASSERT_TRUE(find_pi(q).has_value());
    }
  }
}

TEST(FourFunction, Examples) {
  const auto p = t9553();
  const auto id = PermutationTuple::identity(p.shape());
  IndexCollection all;
  for (const auto& i : oracle::indices({2, 2, 2})) all.push_back(i);
  EXPECT_TRUE(four_function_check(p, id, all, all));
  EXPECT_TRUE(four_function_check(p, id, {{1, 2, 1}}, {{2, 1, 2}}));
  EXPECT_TRUE(four_function_check(p, id, {{1, 1, 1}, {2, 1, 1}}, {{1, 2, 2}, {2, 2, 2}}));
  EXPECT_THROW(four_function_check(parity(), id, all, all), std::domain_error);
  EXPECT_THROW(four_function_check(p, id, {}, all), std::invalid_argument);
}

TEST(FourFunction, HoldsForRandomCollections) {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = oracle::rank2_draw(rng, {3, 2, 2}).p;
    const auto pi = find_pi(p);
    ASSERT_TRUE(pi);
    const auto all = oracle::indices({3, 2, 2});
    IndexCollection c, c2;
    for (const auto& i : all) {
      if (rng.integer(0, 2) == 0) c.push_back(i);
      if (rng.integer(0, 2) == 0) c2.push_back(i);
    }
    if (c.empty()) c.push_back(all.front());
    if (c2.empty()) c2.push_back(all.back());
    ASSERT_TRUE(four_function_check(p, *pi, c, c2));
  }
}
