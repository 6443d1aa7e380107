// SPDX-License-Identifier: Apache-2.0
//
// Three-term progressions a, a + d, a + 2d in F_p^n. Counts are over ordered
// pairs (a, d); each nontrivial unordered progression appears twice (d, -d).
// Since p is odd, (a, d) <-> (a, a + 2d) is a bijection, so the progressions
// of A are the ordered pairs (x, z) in A^2 whose midpoint is in A.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fpreg/cayley.hpp"
#include "fpreg/error.hpp"
#include "fpreg/fourier.hpp"
#include "fpreg/regularity.hpp"
#include "fpreg/rng.hpp"
#include "fpreg/vectorspace.hpp"

namespace fpreg {

struct APTriple {
  Point a;
  Point d;
  bool nontrivial() const { return d.index != 0; }
  bool operator==(const APTriple&) const = default;
};

inline std::uint64_t count_3aps_naive(const DenseSubset& a, bool include_trivial) {
  const Space& s = a.space();
  std::uint64_t count = 0;
  for (Point x : a.members())
    for (Point z : a.members())
      if (x != z && a.contains(s.midpoint(x, z))) ++count;
  return include_trivial ? count + a.size() : count;
}

// N^2 sum_xi A^(-xi)^2 A^(2 xi), trivial progressions included.
inline std::uint64_t count_3aps_fourier(const DenseSubset& a) {
  if (a.empty()) return 0;
  const Space& s = a.space();
  const Spectrum spec = dft(a);
  Complex acc = 0.0;
  for (std::uint32_t k = 0; k < s.size(); ++k) {
    const Point xi{k};
    const Complex neg = spec.at(s.neg(xi));
    acc += neg * neg * spec.at(s.scale(2, xi));
  }
  const double n = s.size();
  return static_cast<std::uint64_t>(std::llround(acc.real() * n * n));
}

// First nontrivial (a, d) in the order a ascending, then d ascending.
inline std::optional<APTriple> find_nontrivial_3ap(const DenseSubset& a) {
  const Space& s = a.space();
  for (Point x : a.members()) {
    std::optional<Point> best;
    for (Point z : a.members()) {
      if (z == x) continue;
      const Point mid = s.midpoint(x, z);
      if (!a.contains(mid)) continue;
      const Point d = s.sub(mid, x);
      if (!best || d < *best) best = d;
    }
    if (best) return APTriple{x, *best};
  }
  return std::nullopt;
}

struct CapSetResult {
  std::uint64_t size = 0;
  DenseSubset witness;
  std::string method;
};

namespace detail {

// Unordered nontrivial progressions as bit masks over the points of a small space.
inline std::vector<std::uint32_t> progression_masks(const Space& s) {
  std::vector<std::uint32_t> masks;
  for (std::uint32_t x = 0; x < s.size(); ++x)
    for (std::uint32_t z = x + 1; z < s.size(); ++z) {
      const Point y = s.midpoint(Point{x}, Point{z});
      const std::uint32_t m = (1u << x) | (1u << z) | (1u << y.index);
      masks.push_back(m);
    }
  std::sort(masks.begin(), masks.end());
  masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
  return masks;
}

struct CapSearch {
  const Space& space;
  std::uint32_t n;
  std::uint32_t best_mask = 0;
  int best = 0;

  // Points completing a progression with the pair {x, y}.
  std::uint32_t completions(std::uint32_t x, std::uint32_t y) const {
    const Point px{x}, py{y};
    return (1u << space.combine(2, py, -1, px).index) | (1u << space.combine(2, px, -1, py).index) |
           (1u << space.midpoint(px, py).index);
  }

  void run(std::uint32_t chosen, std::uint32_t forbidden, std::uint32_t next, int size) {
    if (size > best) {
      best = size;
      best_mask = chosen;
    }
    const std::uint32_t all = n == 32 ? ~0u : ((1u << n) - 1);
    const std::uint32_t above = next >= n ? 0u : (all & ~((1u << next) - 1));
    const std::uint32_t open = above & ~forbidden & ~chosen;
    if (size + std::popcount(open) <= best) return;
    for (std::uint32_t x = next; x < n; ++x) {
      if (!(open >> x & 1u)) continue;
      std::uint32_t f = forbidden;
      for (std::uint32_t y = 0; y < n; ++y)
        if (chosen >> y & 1u) f |= completions(x, y);
      run(chosen | (1u << x), f, x + 1, size + 1);
      const std::uint32_t rest = open & ~((2u << x) - 1);
      if (size + std::popcount(rest) <= best) return;
    }
  }
};

}  // namespace detail

// Largest progression-free subset: exhaustive over all subsets when N <= 16,
// branch and bound (with 0 fixed in the set, by translation invariance) up to N = 27.
inline CapSetResult capset_max_exhaustive(int p, int n) {
  const Space s(p, n);
  require_input(s.size() <= 27, "exhaustive cap-set search is limited to 27 points, F_" +
                                    std::to_string(p) + "^" + std::to_string(n) + " has " +
                                    std::to_string(s.size()));
  std::uint32_t best_mask = 0;
  std::string method;
  if (s.size() <= 16) {
    method = "exhaustive";
    const auto prog = detail::progression_masks(s);
    int best = -1;
    for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
      const int size = std::popcount(mask);
      if (size <= best) continue;
      bool free = true;
      for (std::uint32_t t : prog)
        if ((mask & t) == t) {
          free = false;
          break;
        }
      if (free) {
        best = size;
        best_mask = mask;
      }
    }
  } else {
    method = "branch_and_bound";
    detail::CapSearch search{s, s.size()};
    search.run(1u, 0u, 1u, 1);
    best_mask = search.best_mask;
  }
  std::vector<Point> members;
  for (std::uint32_t i = 0; i < s.size(); ++i)
    if (best_mask >> i & 1u) members.push_back(Point{i});
  return CapSetResult{members.size(), DenseSubset::from_members(s, members), method};
}

struct DensityTestReport {
  std::uint64_t subset_size = 0;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;  // sampled subsets without a nontrivial progression
  double failure_frequency = 0.0;
  std::vector<DenseSubset> witnesses;  // at most 10
};

inline std::uint64_t ceil_fraction(double alpha, std::uint64_t total) {
  return static_cast<std::uint64_t>(std::ceil(alpha * static_cast<double>(total) - 1e-9));
}

// Samples uniform ceil(alpha |R|)-subsets of R and counts progression-free ones.
inline DensityTestReport density_test(const DenseSubset& r, double alpha, std::uint64_t trials,
                                      std::uint64_t seed) {
  require_input(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  const std::uint64_t k = ceil_fraction(alpha, r.size());
  require_input(k <= r.size(), "subset size exceeds |R|");
  DensityTestReport rep;
  rep.subset_size = k;
  rep.trials = trials;
  const CounterRng root(seed);
  for (std::uint64_t t = 0; t < trials; ++t) {
    CounterRng rng = root.substream(t);
    DenseSubset sub = sample_from(r.space(), r.members(), k, rng);
    if (!find_nontrivial_3ap(sub)) {
      ++rep.failures;
      if (rep.witnesses.size() < 10) rep.witnesses.push_back(std::move(sub));
    }
  }
  rep.failure_frequency = trials ? static_cast<double>(rep.failures) / trials : 0.0;
  return rep;
}

// Canonical split: members in increasing index order cut into m contiguous
// runs whose sizes differ by at most one (larger runs first).
inline std::vector<DenseSubset> split_parts(const DenseSubset& a, std::uint64_t m) {
  require_input(m >= 1, "m must be at least 1");
  std::vector<DenseSubset> parts;
  const auto& mem = a.members();
  const std::uint64_t base = mem.size() / m, extra = mem.size() % m;
  std::size_t pos = 0;
  for (std::uint64_t i = 0; i < m; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    parts.push_back(DenseSubset::from_members(
        a.space(), std::span<const Point>(mem.data() + pos, len)));
    pos += len;
  }
  return parts;
}

struct PetalCandidates {
  std::vector<Point> reps;  // B_i, ascending coset representatives
  std::uint64_t qualified = 0;  // before truncation
  std::uint64_t target = 0;     // ceil((alpha / 4m) K)
  bool shortfall = false;
};

// Coset representatives v that are eps-regular for A_i and carry
// |(A_i)_H^v| >= |A_i||H| / (4N), truncated to the target size.
inline PetalCandidates build_petal_candidates(const VectorClassification& cls, const DenseSubset& ai,
                                              double alpha, std::uint64_t m) {
  const Subspace& h = cls.h;
  const double need = 0.25 * static_cast<double>(ai.size()) * h.size() / h.space().size();
  PetalCandidates out;
  out.target = static_cast<std::uint64_t>(std::ceil(alpha / (4.0 * m) * h.index() - 1e-9));
  for (const auto& rec : cls.cosets)
    if (rec.regular && static_cast<double>(rec.local_size) >= need - 1e-9) out.reps.push_back(rec.rep);
  out.qualified = out.reps.size();
  if (out.reps.size() > out.target) out.reps.resize(out.target);
  out.shortfall = out.qualified < out.target;
  return out;
}

inline PetalCandidates build_petal_candidates(const DenseSubset& ai, const Subspace& h, double eps,
                                              double alpha, std::uint64_t m) {
  return build_petal_candidates(classify_vectors(ai, h, eps), ai, alpha, m);
}

struct Petal {
  Point left;   // in B_j0
  Point right;  // in B_k0
};

struct Flower {
  Subspace h;
  std::vector<DenseSubset> parts;
  std::uint64_t i0 = 0, j0 = 0, k0 = 0;
  Point center;
  std::vector<Petal> petals;
  double eps = 0.0;
  double alpha = 0.0;
  std::uint64_t m = 0;
};

struct FlowerOutcome {
  explicit FlowerOutcome(RegularityReport r) : regularity(std::move(r)) {}

  std::optional<Flower> flower;
  std::string failure_stage;  // empty on success
  std::string branch;         // "case1" or "case2"
  std::uint64_t cosets = 0;   // K
  std::uint64_t shared = 0;   // |B|
  std::vector<std::uint64_t> candidate_sizes;  // |B_i| after truncation
  std::vector<bool> shortfall;
  RegularityReport regularity;
};

namespace detail {

// Flowers are midpoint-centred: the centre is the middle term of each petal.
inline void best_flower(const Subspace& h, const std::vector<std::vector<std::uint8_t>>& member,
                        const std::vector<Point>& reps, FlowerOutcome& out, Flower proto) {
  const Space& s = h.space();
  const CosetSystem cosets(h);
  const std::size_t m = member.size();
  std::size_t best = 0;
  for (std::size_t i0 = 0; i0 < m; ++i0)
    for (std::size_t j0 = 0; j0 < m; ++j0)
      for (std::size_t k0 = j0 + 1; k0 < m; ++k0) {
        if (j0 == i0 || k0 == i0) continue;
        for (std::size_t c = 0; c < reps.size(); ++c) {
          if (!member[i0][c]) continue;
          const Point centre = reps[c];
          const Point twice = s.scale(2, centre);
          std::vector<Petal> petals;
          for (std::size_t x = 0; x < reps.size(); ++x) {
            if (!member[j0][x] || x == c) continue;
            const std::uint32_t y = cosets.position(s.sub(twice, reps[x]));
            if (member[k0][y]) petals.push_back(Petal{reps[x], reps[y]});
          }
          if (petals.size() > best) {
            best = petals.size();
            proto.i0 = i0;
            proto.j0 = j0;
            proto.k0 = k0;
            proto.center = centre;
            proto.petals = std::move(petals);
          }
        }
      }
  if (best > 0) out.flower = std::move(proto);
}

}  // namespace detail

// Splits A, regularizes all parts at once, builds the candidate sets B_i and
// returns the flower with the most petals, or the stage that degenerated.
inline FlowerOutcome flower_find(const DenseSubset& a, std::uint64_t m, const RegularityOptions& opt) {
  require_input(m >= 3, "a flower needs at least three parts");
  require_input(a.size() >= m, "A must have at least m elements");
  const auto parts = split_parts(a, m);
  FlowerOutcome out(regularize_multi(parts, opt));
  if (!out.regularity.succeeded) {
    out.failure_stage = "no_regular_subspace";
    return out;
  }
  const Subspace& h = out.regularity.h_final;
  const CosetSystem cosets(h);
  const std::size_t k = cosets.count();
  out.cosets = k;

  std::vector<PetalCandidates> cand;
  for (std::size_t i = 0; i < m; ++i) {
    cand.push_back(build_petal_candidates(out.regularity.classifications[i], parts[i], opt.alpha, m));
    out.candidate_sizes.push_back(cand.back().reps.size());
    out.shortfall.push_back(cand.back().shortfall);
  }
  if (std::any_of(cand.begin(), cand.end(), [](const auto& c) { return c.reps.empty(); })) {
    out.failure_stage = "empty_candidates";
    return out;
  }

  std::vector<std::vector<std::uint8_t>> in_b(m, std::vector<std::uint8_t>(k, 0));
  for (std::size_t i = 0; i < m; ++i)
    for (Point v : cand[i].reps) in_b[i][cosets.position(v)] = 1;
  std::vector<std::uint8_t> shared(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    int hits = 0;
    for (std::size_t i = 0; i < m; ++i) hits += in_b[i][c];
    if (hits >= 3) {
      shared[c] = 1;
      ++out.shared;
    }
  }

  std::vector<std::vector<std::uint8_t>> member(m, std::vector<std::uint8_t>(k, 0));
  const double case1_size = opt.alpha / (8.0 * m) * k;
  if (static_cast<double>(out.shared) >= case1_size - 1e-9 && out.shared > 0) {
    out.branch = "case1";
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t c = 0; c < k; ++c) member[i][c] = in_b[i][c] && shared[c];
  } else {
    // B' = (union B_i) \ B; each element goes to the lowest i that holds it.
    out.branch = "case2";
    for (std::size_t c = 0; c < k; ++c) {
      if (shared[c]) continue;
      for (std::size_t i = 0; i < m; ++i)
        if (in_b[i][c]) {
          member[i][c] = 1;
          break;
        }
    }
  }

  Flower proto{h, parts, 0, 0, 0, Point{}, {}, opt.eps, opt.alpha, m};
  detail::best_flower(h, member, cosets.reps(), out, std::move(proto));
  if (!out.flower) out.failure_stage = "no_cross_part_3aps";
  return out;
}

struct FlowerCheck {
  bool ok = true;
  std::vector<std::string> problems;

  void fail(std::string what) {
    ok = false;
    problems.push_back(std::move(what));
  }
};

// Re-derives every flower property from the stored parts and subspace using
// localization and subspace transforms only:
//   (1) H is eps-regular for every part and its index is within W(cap);
//   (2) the centre is an eps-regular translate for A_i0 with a dense localization;
//   (3),(4) every petal term carries a dense localization of A_j0 / A_k0;
//   (5) each (left, centre, right) is a nontrivial progression in V/H with the
//       centre in the middle.
inline FlowerCheck validate_flower(const Flower& f) {
  FlowerCheck chk;
  const Subspace& h = f.h;
  const Space& s = h.space();
  const double n = s.size();
  const double hs = h.size();
  if (f.parts.size() != f.m) chk.fail("part count differs from m");
  if (f.i0 >= f.m || f.j0 >= f.m || f.k0 >= f.m || f.i0 == f.j0 || f.i0 == f.k0 || f.j0 == f.k0) {
    chk.fail("indices i0, j0, k0 must be distinct and below m");
    return chk;
  }
  if (f.petals.empty()) chk.fail("flower has no petals");

  auto local_size = [&](const DenseSubset& part, Point v) {
    return static_cast<double>(localize(part, h, v).size());
  };
  auto sup_at = [&](const DenseSubset& part, Point v) {
    const Spectrum sp = dft(DenseFunction::indicator(localize(part, h, v), h), h);
    double sup = 0.0;
    for (std::size_t k = 1; k < sp.size(); ++k) sup = std::max(sup, std::abs(sp[k]));
    return sup;
  };
  auto regular_at = [&](const DenseSubset& part, Point v) {
    return sup_at(part, v) <= f.eps * part.size() / n + kAmplitudeTolerance;
  };

  // (1)
  const std::uint64_t cap = step_cap(f.eps, f.alpha, f.m);
  const TowerValue w = tower(std::max<std::uint64_t>(cap, 1), s.p());
  if (!w.overflow() && h.index() > *w.value) chk.fail("index of H exceeds the tower bound");
  const CosetSystem cosets(h);
  for (std::size_t i = 0; i < f.parts.size(); ++i) {
    std::uint64_t bad = 0;
    for (Point v : cosets.reps())
      if (!regular_at(f.parts[i], v)) bad += h.size();
    if (static_cast<double>(bad) > f.eps * n + 1e-9)
      chk.fail("H is not eps-regular for part " + std::to_string(i));
  }

  // (2)
  const DenseSubset& ai = f.parts[f.i0];
  if (!regular_at(ai, f.center)) chk.fail("centre is not an eps-regular translate");
  if (local_size(ai, f.center) < 0.25 * ai.size() * hs / n - 1e-9) chk.fail("centre localization too sparse");

  // (3), (4), (5)
  const DenseSubset& aj = f.parts[f.j0];
  const DenseSubset& ak = f.parts[f.k0];
  for (std::size_t l = 0; l < f.petals.size(); ++l) {
    const Petal& pt = f.petals[l];
    const std::string tag = "petal " + std::to_string(l) + ": ";
    if (local_size(aj, pt.left) < 0.25 * aj.size() * hs / n - 1e-9) chk.fail(tag + "left localization too sparse");
    if (local_size(ak, pt.right) < 0.25 * ak.size() * hs / n - 1e-9) chk.fail(tag + "right localization too sparse");
    const Point gap = s.sub(s.add(pt.left, pt.right), s.scale(2, f.center));
    if (!h.contains(gap)) chk.fail(tag + "not a progression in V/H");
    if (h.contains(s.sub(pt.left, f.center))) chk.fail(tag + "trivial progression");
  }
  return chk;
}

}  // namespace fpreg
