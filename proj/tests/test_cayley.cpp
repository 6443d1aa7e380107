// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "fpreg/cayley.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace fpreg;
using support::pt;

namespace {

DenseSubset from_bits(const Space& s, std::uint32_t bits) {
  std::vector<std::uint8_t> m(s.size());
  for (std::uint32_t i = 0; i < s.size(); ++i) m[i] = (bits >> i) & 1u;
  return DenseSubset(s, std::move(m));
}

DenseSubset subspace_set(const Subspace& h) {
  std::vector<Point> e = h.elements();
  std::sort(e.begin(), e.end());
  return DenseSubset::from_members(h.space(), e);
}

}  // namespace

TEST(EdgeCount, Examples) {
  const Space s(3, 3);
  CounterRng rng(1);
  const DenseSubset x = support::random_subset(s, rng, 0.4), y = support::random_subset(s, rng, 0.6);
  EXPECT_EQ(edge_count_direct(DenseSubset::full(s), x, y), x.size() * y.size());
  const std::vector<Point> zero{Point{0}};
  std::uint64_t both = 0;
  for (std::uint32_t i = 0; i < s.size(); ++i) both += x.contains(Point{i}) && y.contains(Point{i});
  EXPECT_EQ(edge_count_direct(DenseSubset::from_members(s, zero), x, y), both);
  EXPECT_EQ(edge_count_direct(DenseSubset(s), x, y), 0u);
  EXPECT_NEAR(edge_count_fourier(DenseSubset::full(s), x, y), double(x.size() * y.size()), 1e-8);
  EXPECT_EQ(edge_count_fourier(support::random_subset(s, rng, 0.5), DenseSubset(s), y), 0.0);
}

TEST(EdgeCount, ExhaustiveOnF31) {
  const Space s(3, 1);
  const oracle::Geometry g(3, 1);
  for (std::uint32_t a = 0; a < 8; ++a)
    for (std::uint32_t x = 0; x < 8; ++x)
      for (std::uint32_t y = 0; y < 8; ++y) {
        const DenseSubset A = from_bits(s, a), X = from_bits(s, x), Y = from_bits(s, y);
        const std::uint64_t direct = edge_count_direct(A, X, Y);
        EXPECT_EQ(direct, oracle::edges(g, A.mask(), X.mask(), Y.mask()));
        EXPECT_EQ(std::llround(edge_count_fourier(A, X, Y)), static_cast<long long>(direct));
        EXPECT_EQ(edge_count(A, X, Y), direct);
      }
}

TEST(EdgeCount, RandomTriplesOnF34) {
  const Space s(3, 4);
  const oracle::Geometry g(3, 4);
  CounterRng rng(2);
  for (int t = 0; t < 100; ++t) {
    const DenseSubset a = support::random_subset(s, rng, rng.uniform());
    const DenseSubset x = support::random_subset(s, rng, rng.uniform());
    const DenseSubset y = support::random_subset(s, rng, rng.uniform());
    const std::uint64_t direct = edge_count_direct(a, x, y);
    EXPECT_EQ(direct, oracle::edges(g, a.mask(), x.mask(), y.mask()));
    const double f = edge_count_fourier(a, x, y);
    EXPECT_LT(std::abs(f - static_cast<double>(direct)), 1e-6);
  }
}

TEST(EdgeCount, DegreeRegularity) {
  const Space s(5, 2);
  CounterRng rng(3);
  const DenseSubset a = support::random_subset(s, rng, 0.3);
  for (std::uint32_t x = 0; x < s.size(); ++x) {
    const std::vector<Point> one{Point{x}};
    std::uint64_t deg = 0;
    for (std::uint32_t y = 0; y < s.size(); ++y) {
      const std::vector<Point> other{Point{y}};
      deg += edge_count_direct(a, DenseSubset::from_members(s, one), DenseSubset::from_members(s, other));
    }
    EXPECT_EQ(deg, a.size());
  }
}

TEST(EdgeCount, CellsFollowLocalization) {
  CounterRng rng(4);
  for (int t = 0; t < 40; ++t) {
    const Space s(3, 4);
    const Subspace h = support::random_subspace(s, rng);
    const DenseSubset a = support::random_subset(s, rng, 0.3);
    const Point vi = support::random_point(s, rng), vj = support::random_point(s, rng);
    std::vector<Point> ci, cj;
    for (Point x : h.elements()) {
      ci.push_back(s.add(x, vi));
      cj.push_back(s.add(x, vj));
    }
    std::sort(ci.begin(), ci.end());
    std::sort(cj.begin(), cj.end());
    const std::uint64_t e =
        edge_count_direct(a, DenseSubset::from_members(s, ci), DenseSubset::from_members(s, cj));
    EXPECT_EQ(e, h.size() * localize(a, h, s.sub(vi, vj)).size());
  }
}

TEST(EdgeCount, MismatchedSpaces) {
  const Space s(3, 2), t(3, 3);
  EXPECT_THROW(edge_count_direct(DenseSubset(s), DenseSubset(t), DenseSubset(s)), InputError);
  EXPECT_THROW(edge_count_fourier(DenseSubset(s), DenseSubset(s), DenseSubset(t)), InputError);
}

TEST(SigmaCertificate, WholeSpacePasses) {
  const Space s(3, 4);
  for (double sigma : {0.01, 0.5, 0.9})
    for (double delta : {0.01, 0.5}) {
      const auto c = sigma_certificate(DenseSubset::full(s), sigma, delta);
      EXPECT_TRUE(c.passed);
      EXPECT_NEAR(c.fourier_sup, 0.0, 1e-15);
    }
}

TEST(SigmaCertificate, IndexPSubspaceFails) {
  const Space s(3, 3);
  const std::vector<Point> gens{pt(s, {1, 0, 0}), pt(s, {0, 1, 0})};
  const DenseSubset r = subspace_set(Subspace::span(s, gens));
  const auto c = sigma_certificate(r, 0.1, 0.5);
  EXPECT_NEAR(c.fourier_sup, static_cast<double>(r.size()) / s.size(), 1e-14);
  EXPECT_FALSE(c.passed);
}

TEST(SigmaCertificate, PassImpliesThresholdAndErrors) {
  const Space s(3, 6);
  CounterRng rng(5);
  for (int t = 0; t < 10; ++t) {
    const DenseSubset r = support::random_subset(s, rng, 0.5);
    const auto c = sigma_certificate(r, 0.2, 0.5);
    EXPECT_EQ(c.passed, c.fourier_sup * s.size() <= 0.5 * 0.2 * r.size() * (1 + 1e-15));
  }
  EXPECT_THROW(sigma_certificate(DenseSubset::full(s), 0.0, 0.5), InputError);
  EXPECT_THROW(sigma_certificate(DenseSubset::full(s), 0.5, 1.0), InputError);
}

TEST(SigmaCertificate, SoundOnSampledPairs) {
  const Space s(3, 6);
  CounterRng rng(6);
  std::vector<Point> all;
  for (std::uint32_t i = 0; i < s.size(); ++i) all.push_back(Point{i});
  int certified = 0;
  for (int t = 0; t < 20 && certified < 3; ++t) {
    const DenseSubset r = support::random_subset(s, rng, 0.5);
    const auto c = sigma_certificate(r, 0.3, 0.5);
    if (!c.passed) continue;
    ++certified;
    const auto min = static_cast<std::uint64_t>(std::ceil(0.3 * s.size()));
    for (int k = 0; k < 50; ++k) {
      const DenseSubset x = sample_from(s, all, min + rng.below(s.size() - min + 1), rng);
      const DenseSubset y = sample_from(s, all, min + rng.below(s.size() - min + 1), rng);
      const double expect = double(r.size()) * x.size() * y.size() / s.size();
      EXPECT_LE(std::abs(double(edge_count(r, x, y)) - expect), 0.5 * expect);
    }
  }
  EXPECT_GT(certified, 0);
}

TEST(PairDensity, WholeGenerator) {
  const Space s(3, 3);
  const std::vector<Point> e{pt(s, {1, 0, 0})};
  const Subspace h = Subspace::span(s, e);
  const auto rep = pair_density_check(DenseSubset::full(s), h, Point{4}, Point{7}, 0.5, 20, 1);
  EXPECT_TRUE(rep.applicable);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.pair_density, 1.0);
  EXPECT_EQ(rep.max_ratio, 0.0);
}

TEST(PairDensity, SubspaceGenerator) {
  const Space s(3, 3);
  const std::vector<Point> gens{pt(s, {1, 0, 0}), pt(s, {0, 1, 0})};
  const Subspace h = Subspace::span(s, gens);
  const auto rep = pair_density_check(subspace_set(h), h, Point{0}, Point{0}, 0.5, 20, 2);
  EXPECT_TRUE(rep.applicable);
  EXPECT_EQ(rep.pair_density, 1.0);
  EXPECT_EQ(rep.localized_density, 1.0);
  EXPECT_EQ(rep.max_ratio, 0.0);
  EXPECT_TRUE(rep.passed);
}

TEST(PairDensity, RandomThirdOfF35) {
  const Space s(3, 5);
  CounterRng rng(7);
  const DenseSubset a = sample_from(s, [&] {
    std::vector<Point> all;
    for (std::uint32_t i = 0; i < s.size(); ++i) all.push_back(Point{i});
    return all;
  }(), s.size() / 3, rng);
  const std::vector<Point> gens{pt(s, {1, 0, 0, 0, 0}), pt(s, {0, 1, 0, 0, 0}), pt(s, {0, 0, 1, 0, 0})};
  const Subspace h = Subspace::span(s, gens);
  int applicable = 0;
  for (std::uint32_t v = 0; v < 9; ++v) {
    const Point vi{v * 27}, vj{((v * 5) % 9) * 27};
    const auto rep = pair_density_check(a, h, vi, vj, 0.5, 50, v);
    if (!rep.applicable) continue;
    ++applicable;
    EXPECT_LE(rep.max_ratio, 1.0);
    EXPECT_TRUE(rep.passed);
    EXPECT_DOUBLE_EQ(rep.pair_density, rep.localized_density);
  }
  EXPECT_GT(applicable, 0);
}

TEST(PairDensity, IrregularShiftIsInapplicable) {
  const Space s(3, 2);
  const std::vector<Point> pts{Point{0}, Point{1}};
  const auto rep = pair_density_check(DenseSubset::from_members(s, pts), Subspace::whole(s), Point{0},
                                      Point{0}, 0.1, 10, 3);
  EXPECT_FALSE(rep.applicable);
  EXPECT_FALSE(rep.passed);
  EXPECT_FALSE(rep.reason.empty());
}

TEST(Sparse, WholeSpaceIsOneSparse) {
  const Space s(3, 3);
  const auto rep = sparse_check(DenseSubset::full(s), 1.0, 0.2, 40, 1);
  EXPECT_TRUE(rep.sparse);
  EXPECT_NEAR(rep.max_ratio, 1.0, 1e-12);
}

TEST(Sparse, MatchingConcentratesOnDiagonal) {
  const Space s(3, 3);
  const std::vector<Point> zero{Point{0}};
  const auto rep = sparse_check(DenseSubset::from_members(s, zero), 2.0, 0.1, 20, 2);
  EXPECT_FALSE(rep.sparse);
  ASSERT_TRUE(rep.witness.has_value());
  EXPECT_GT(rep.witness->density, 2.0 / s.size());
}

TEST(Sparse, SubsetOfCertifiedSet) {
  const Space s(3, 6);
  CounterRng rng(8);
  std::vector<Point> all;
  for (std::uint32_t i = 0; i < s.size(); ++i) all.push_back(Point{i});
  for (int t = 0; t < 20; ++t) {
    const DenseSubset r = sample_from(s, all, s.size() / 2, rng);
    if (!sigma_certificate(r, 0.3, 0.5).passed) continue;
    const DenseSubset a = sample_from(s, r.members(), r.size() / 2, rng);
    const double alpha = double(a.size()) / r.size();
    EXPECT_TRUE(sparse_check(a, 2.0 / alpha, 0.3, 100, 9).sparse);
    return;
  }
  FAIL() << "no certified set drawn";
}

TEST(Petal, Examples) {
  const Space s(3, 2);
  const Subspace v = Subspace::whole(s);
  const PetalGraph full(DenseSubset::full(s), v, Point{0}, Point{0});
  EXPECT_EQ(full.edge_count(), 81u);
  EXPECT_EQ(full.density(), 1.0);
  EXPECT_EQ(PetalGraph(DenseSubset(s), v, Point{0}, Point{0}).edge_count(), 0u);
  const std::vector<Point> zero{Point{0}};
  const PetalGraph m = petal_graph(DenseSubset::from_members(s, zero), v, Point{0}, Point{0});
  EXPECT_EQ(m.edge_count(), 9u);
  for (std::uint32_t i = 0; i < 9; ++i) {
    int deg = 0;
    for (std::uint32_t j = 0; j < 9; ++j) deg += m.adjacent(i, j);
    EXPECT_EQ(deg, 1);
  }
}

TEST(Petal, EdgeCountMatchesAdjacency) {
  CounterRng rng(10);
  for (int t = 0; t < 20; ++t) {
    const Space s(3, 3);
    const Subspace h = support::random_subspace(s, rng);
    const DenseSubset a = support::random_subset(s, rng, 0.4);
    const PetalGraph g(a, h, support::random_point(s, rng), support::random_point(s, rng));
    std::uint64_t e = 0;
    for (std::uint32_t i = 0; i < g.side(); ++i)
      for (std::uint32_t j = 0; j < g.side(); ++j) e += g.adjacent(i, j);
    EXPECT_EQ(g.edge_count(), e);
  }
}
