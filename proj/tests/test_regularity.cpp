// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "fpreg/cayley.hpp"
#include "fpreg/regularity.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace fpreg;
using support::pt;

namespace {

// {x : x_2 = 0} in F_3^2, i.e. points 0, 1, 2.
DenseSubset line_set(const Space& s) {
  const std::vector<Point> m{Point{0}, Point{1}, Point{2}};
  return DenseSubset::from_members(s, m);
}

Subspace line_space(const Space& s) {
  const std::vector<Point> e1{pt(s, {1, 0})};
  return Subspace::span(s, e1);
}

// Oracle sup over xi outside H^perp of |A_H^v^(xi)|.
double sup_oracle(const Space& s, const DenseSubset& a, const Subspace& h, Point v) {
  const oracle::Geometry g = support::geometry(s);
  const auto hm = support::mask(h);
  std::vector<double> f(s.size(), 0.0);
  for (Point x : h.elements()) f[x.index] = a.contains(s.sub(x, v)) ? 1.0 : 0.0;
  double sup = 0.0;
  for (std::uint32_t xi = 0; xi < s.size(); ++xi) {
    bool perp = true;
    for (Point x : h.elements()) perp = perp && s.pairing(x, Point{xi}) == 0;
    if (!perp) sup = std::max(sup, std::abs(oracle::fourier(g, f, hm, xi)));
  }
  return sup;
}

}  // namespace

TEST(RestrictedSup, Examples) {
  const Space s(3, 2);
  CounterRng rng(1);
  for (int t = 0; t < 10; ++t) {
    const Subspace h = support::random_subspace(s, rng);
    EXPECT_NEAR(restricted_sup(DenseSubset::full(s), h, support::random_point(s, rng)), 0.0, 1e-15);
  }
  const Subspace l = line_space(s);
  EXPECT_NEAR(restricted_sup(line_set(s), l, Point{0}), 0.0, 1e-15);
  for (std::uint32_t v = 0; v < 9; ++v)
    EXPECT_NEAR(restricted_sup(line_set(s), Subspace::whole(s), Point{v}), 1.0 / 3, 1e-15);
}

TEST(RestrictedSup, MatchesOracleAndPicksMinimalWitness) {
  CounterRng rng(2);
  for (int t = 0; t < 60; ++t) {
    const Space s(3, 3);
    const Subspace h = support::random_subspace(s, rng);
    const DenseSubset a = support::random_subset(s, rng, 0.4);
    const Point v = support::random_point(s, rng);
    const RestrictedSup r = restricted_sup_detail(a, h, v);
    EXPECT_NEAR(r.value, sup_oracle(s, a, h, v), 1e-12);
    if (h.dim() == 0) {
      EXPECT_FALSE(r.witness.has_value());
      continue;
    }
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_NE(h.dual_index(*r.witness), 0u);
    const Spectrum sp = dft(DenseFunction::indicator(localize(a, h, v), h), h);
    EXPECT_NEAR(std::abs(sp.at(*r.witness)), r.value, 1e-12);
    for (std::uint32_t xi = 0; xi < r.witness->index; ++xi)
      if (h.dual_index(Point{xi}) != 0) {
        EXPECT_LT(std::abs(sp.at(Point{xi})), r.value - 1e-12);
      }
  }
}

TEST(Classify, Examples) {
  const Space s(3, 2);
  const auto all = classify_vectors(DenseSubset::full(s), Subspace::whole(s), 0.1);
  EXPECT_TRUE(all.subspace_regular());
  EXPECT_EQ(all.irregular_mass, 0u);

  const auto bad = classify_vectors(line_set(s), Subspace::whole(s), 0.5);
  EXPECT_NEAR(bad.threshold, 1.0 / 6, 1e-15);
  EXPECT_EQ(bad.irregular_mass, 9u);
  EXPECT_FALSE(bad.subspace_regular());

  const auto good = classify_vectors(line_set(s), line_space(s), 0.5);
  EXPECT_EQ(good.cosets.size(), 3u);
  for (const auto& c : good.cosets) EXPECT_TRUE(c.regular);
  EXPECT_TRUE(good.subspace_regular());
}

TEST(Classify, RegularityIsCosetInvariantAndThreadIndependent) {
  CounterRng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Space s(3, 4);
    const Subspace h = support::random_subspace(s, rng);
    const DenseSubset a = support::random_subset(s, rng, 0.3);
    const double eps = 0.2;
    const auto one = classify_vectors(a, h, eps, 1);
    const auto four = classify_vectors(a, h, eps, 4);
    ASSERT_EQ(one.cosets.size(), four.cosets.size());
    for (std::size_t i = 0; i < one.cosets.size(); ++i) {
      EXPECT_EQ(one.cosets[i].sup_value, four.cosets[i].sup_value);
      EXPECT_EQ(one.cosets[i].witness, four.cosets[i].witness);
    }
    EXPECT_LE(one.irregular_mass, s.size());
    const CosetSystem cs(h);
    for (std::uint32_t v = 0; v < s.size(); v += 5) {
      const bool reg = restricted_sup(a, h, Point{v}) <= one.threshold + kAmplitudeTolerance;
      EXPECT_EQ(reg, one.cosets[cs.position(Point{v})].regular);
    }
  }
  EXPECT_THROW(classify_vectors(DenseSubset::full(Space(3, 2)), Subspace::whole(Space(3, 2)), 1.0), InputError);
}

TEST(Energy, Examples) {
  const Space s(3, 2);
  EXPECT_DOUBLE_EQ(energy(line_set(s), Subspace::whole(s)), 1.0);
  EXPECT_DOUBLE_EQ(energy(line_set(s), Subspace::zero(s)), 3.0);
  EXPECT_DOUBLE_EQ(energy(line_set(s), line_space(s)), 3.0);
  EXPECT_THROW(energy(DenseSubset(s), Subspace::whole(s)), InputError);
}

TEST(Energy, MatchesOracleAndRange) {
  CounterRng rng(4);
  for (int t = 0; t < 40; ++t) {
    const Space s(3, 3);
    const oracle::Geometry g(3, 3);
    const Subspace h = support::random_subspace(s, rng);
    const DenseSubset a = support::random_nonempty(s, rng, 0.3);
    const double e = energy(a, h);
    EXPECT_NEAR(e, oracle::energy(g, a.mask(), support::mask(h)), 1e-12);
    EXPECT_GT(e, 0.0);
    EXPECT_LE(e, double(s.size()) / a.size() + 1e-12);
  }
}

TEST(Refine, WorkedLineExample) {
  const Space s(3, 2);
  const RefineResult r = refine_step(line_set(s), Subspace::whole(s), 0.5);
  // Every coset ties on (0,1) and (0,2); the minimal index wins.
  ASSERT_FALSE(r.witnesses.empty());
  for (Point xi : r.witnesses) EXPECT_TRUE(xi == pt(s, {0, 1}) || xi == pt(s, {0, 2}));
  EXPECT_EQ(r.witnesses.front(), pt(s, {0, 1}));
  EXPECT_EQ(r.refined, line_space(s));
  EXPECT_DOUBLE_EQ(r.energy_before, 1.0);
  EXPECT_DOUBLE_EQ(r.energy_after, 3.0);
  EXPECT_EQ(r.index_after, 3u);
  EXPECT_LE(r.index_after, 6u);
}

TEST(Refine, RegularSubspaceIsAContractError) {
  const Space s(3, 2);
  EXPECT_THROW(refine_step(line_set(s), line_space(s), 0.5), ContractError);
}

TEST(Refine, IncrementAndIndexGrowthOnRandomInstances) {
  CounterRng rng(5);
  const double eps = 0.3;
  int triggered = 0;
  for (int t = 0; t < 400 && triggered < 100; ++t) {
    const Space s(3, 4);
    const oracle::Geometry g(3, 4);
    const Subspace h = support::random_subspace(s, rng);
    const DenseSubset a = support::random_nonempty(s, rng, 0.05 + 0.3 * rng.uniform());
    const auto cls = classify_vectors(a, h, eps);
    if (cls.subspace_regular()) continue;
    ++triggered;
    const RefineResult r = refine_step(a, cls);
    EXPECT_GE(r.energy_after - r.energy_before, eps * eps * eps - 1e-9);
    EXPECT_NEAR(r.energy_after, oracle::energy(g, a.mask(), support::mask(r.refined)), 1e-9);
    EXPECT_TRUE(r.refined.is_subspace_of(h));
    EXPECT_LE(std::log(double(r.index_after)), std::log(double(r.index_before)) + r.index_before * std::log(3.0) + 1e-9);
    // H' annihilates every witness.
    for (Point xi : r.witnesses)
      for (Point x : r.refined.elements()) EXPECT_EQ(s.pairing(x, xi), 0);
  }
  EXPECT_GE(triggered, 50);
}

TEST(Tower, Values) {
  EXPECT_EQ(*tower(1, 3).value, 6u);
  EXPECT_EQ(*tower(2, 3).value, 46656u);
  EXPECT_TRUE(tower(3, 3).overflow());
  EXPECT_EQ(*tower(1, 13).value, 26u);
  EXPECT_TRUE(tower(2, 13).overflow());
  EXPECT_THROW(tower(0, 3), InputError);
}

TEST(StepCap, Formula) {
  EXPECT_EQ(step_cap(0.4, 0.5), 250u);
  EXPECT_EQ(step_cap(0.5, 1.0), 32u);
  EXPECT_EQ(step_cap(0.5, 1.0, 3), 288u);
  EXPECT_EQ(default_floor(0.5, 1.0, Space(3, 4)), 1u);
}

TEST(Regularize, WholeSpaceSucceedsImmediately) {
  const Space s(3, 3);
  const RegularityReport r = regularize(DenseSubset::full(s), RegularityOptions{});
  EXPECT_TRUE(r.succeeded);
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_EQ(r.h_final, Subspace::whole(s));
  EXPECT_EQ(r.energy_trace, (std::vector<double>{1.0}));
}

TEST(Regularize, WorkedLineExample) {
  const Space s(3, 2);
  RegularityOptions opt;
  opt.eps = 0.5;
  opt.alpha = 1.0;
  const RegularityReport r = regularize(line_set(s), opt);
  EXPECT_TRUE(r.succeeded);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.energy_trace, (std::vector<double>{1.0, 3.0}));
  EXPECT_EQ(r.h_final, line_space(s));
  EXPECT_EQ(r.stop_reason, StopReason::kRegular);
  ASSERT_EQ(r.steps.size(), 2u);
  EXPECT_EQ(r.steps[0].irregular_mass, 9u);
  EXPECT_EQ(r.steps[1].index, 3u);
}

TEST(Regularize, EmptySetIsVacuouslyRegular) {
  const RegularityReport r = regularize(DenseSubset(Space(3, 3)), RegularityOptions{});
  EXPECT_TRUE(r.succeeded);
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_EQ(r.classifications.front().irregular_mass, 0u);
}

TEST(Regularize, StopReasons) {
  const Space s(3, 2);
  RegularityOptions opt;
  opt.eps = 0.5;
  opt.floor = 4;  // the line has 3 points
  EXPECT_EQ(regularize(line_set(s), opt).stop_reason, StopReason::kFloorHit);
  EXPECT_THROW(regularize(line_set(s), RegularityOptions{0.0, 1.0, 1, std::nullopt, 1}), InputError);
  RegularityOptions bad_floor;
  bad_floor.floor = 0;
  EXPECT_THROW(regularize(line_set(s), bad_floor), InputError);
}

TEST(Regularize, HalfOfCertifiedSet) {
  const Space s(3, 6);
  CounterRng rng(6);
  std::vector<Point> all;
  for (std::uint32_t i = 0; i < s.size(); ++i) all.push_back(Point{i});
  for (int t = 0; t < 20; ++t) {
    const DenseSubset r = sample_from(s, all, s.size() / 2, rng);
    const auto cert = sigma_certificate(r, 0.3, 0.5);
    if (!cert.passed) continue;
    const DenseSubset a = sample_from(s, r.members(), r.size() / 2, rng);
    RegularityOptions opt;
    opt.eps = 0.4;
    opt.alpha = 0.5;
    opt.ambient = CertifiedAmbient{0.3, 0.5};
    const RegularityReport rep = regularize(a, opt);
    EXPECT_TRUE(rep.succeeded);
    EXPECT_EQ(rep.step_cap, 250u);
    EXPECT_LE(rep.iterations, 250u);
    EXPECT_TRUE(rep.energy_ceiling_held);
    EXPECT_TRUE(rep.index_growth_held);
    ASSERT_TRUE(rep.energy_ceiling.has_value());
    EXPECT_NEAR(*rep.energy_ceiling, 2.25 * 4 / 0.25, 1e-12);
    EXPECT_TRUE(classify_vectors(a, rep.h_final, 0.4).subspace_regular());
    return;
  }
  FAIL() << "no certified set drawn";
}

TEST(Regularize, TraceIncreasesAndIsDeterministic) {
  CounterRng rng(7);
  for (int t = 0; t < 10; ++t) {
    const Space s(3, 4);
    const DenseSubset a = support::random_nonempty(s, rng, 0.2);
    RegularityOptions opt;
    opt.eps = 0.3;
    const RegularityReport r1 = regularize(a, opt);
    opt.threads = 3;
    const RegularityReport r2 = regularize(a, opt);
    EXPECT_EQ(r1.h_final, r2.h_final);
    EXPECT_EQ(r1.energy_trace, r2.energy_trace);
    for (std::size_t i = 1; i < r1.energy_trace.size(); ++i)
      EXPECT_GE(r1.energy_trace[i] - r1.energy_trace[i - 1], 0.027 - 1e-9);
    if (r1.succeeded) {
      EXPECT_TRUE(classify_vectors(a, r1.h_final, 0.3).subspace_regular());
    }
  }
}

TEST(RegularizeMulti, SinglePartMatchesRegularize) {
  const Space s(3, 3);
  CounterRng rng(8);
  const DenseSubset a = support::random_nonempty(s, rng, 0.3);
  RegularityOptions opt;
  opt.eps = 0.3;
  const RegularityReport one = regularize(a, opt);
  const RegularityReport multi = regularize_multi({a}, opt);
  EXPECT_EQ(one.h_final, multi.h_final);
  EXPECT_EQ(one.energy_trace, multi.energy_trace);
  EXPECT_EQ(one.iterations, multi.iterations);
}

TEST(RegularizeMulti, TwoParallelLines) {
  const Space s(3, 2);
  const std::vector<Point> l0{pt(s, {0, 0}), pt(s, {1, 0}), pt(s, {2, 0})};
  const std::vector<Point> l1{pt(s, {0, 1}), pt(s, {1, 1}), pt(s, {2, 1})};
  RegularityOptions opt;
  opt.eps = 0.5;
  const RegularityReport r =
      regularize_multi({DenseSubset::from_members(s, l0), DenseSubset::from_members(s, l1)}, opt);
  EXPECT_TRUE(r.succeeded);
  EXPECT_LE(r.iterations, 2u);
  EXPECT_EQ(r.h_final, line_space(s));
  ASSERT_EQ(r.classifications.size(), 2u);
  for (const auto& c : r.classifications) EXPECT_TRUE(c.subspace_regular());
}

TEST(RegularizeMulti, RandomSplitOfF36) {
  const Space s(3, 6);
  CounterRng rng(9);
  const DenseSubset a = support::random_nonempty(s, rng, 0.1);
  std::vector<std::vector<Point>> parts(3);
  for (std::size_t i = 0; i < a.members().size(); ++i) parts[i % 3].push_back(a.members()[i]);
  std::vector<DenseSubset> ps;
  for (const auto& p : parts) ps.push_back(DenseSubset::from_members(s, p));
  RegularityOptions opt;
  opt.eps = 0.3;
  opt.alpha = 0.5;
  const RegularityReport r = regularize_multi(ps, opt);
  EXPECT_TRUE(r.succeeded);
  EXPECT_LE(r.iterations, step_cap(0.3, 0.5, 3));
  for (const auto& p : ps) EXPECT_TRUE(classify_vectors(p, r.h_final, 0.3).subspace_regular());
}

TEST(RegularizeMulti, RejectsBadParts) {
  const Space s(3, 2);
  const std::vector<Point> a{Point{0}, Point{1}}, b{Point{1}, Point{2}}, c{Point{3}, Point{4}, Point{5}, Point{6}};
  const RegularityOptions opt;
  EXPECT_THROW(regularize_multi({DenseSubset::from_members(s, a), DenseSubset::from_members(s, b)}, opt),
               InputError);
  EXPECT_THROW(regularize_multi({DenseSubset::from_members(s, a), DenseSubset::from_members(s, c)}, opt),
               InputError);
  EXPECT_THROW(regularize_multi({}, opt), InputError);
}
