// SPDX-License-Identifier: Apache-2.0
//
// Random subsets of F_p^n and Monte Carlo checks of the probabilistic lemmas:
// Fourier sup of random sets, the exponential-moment tail bound, the
// adversarial (t1, t2)-subgraph experiment and progression-density failure.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "fpreg/cayley.hpp"
#include "fpreg/error.hpp"
#include "fpreg/fourier.hpp"
#include "fpreg/parallel.hpp"
#include "fpreg/rng.hpp"
#include "fpreg/threeap.hpp"
#include "fpreg/vectorspace.hpp"

namespace fpreg {

// Uniform r-subset of V (Floyd's algorithm).
inline DenseSubset sample_exact(const Space& space, std::uint64_t r, std::uint64_t seed) {
  require_input(r <= space.size(), "r = " + std::to_string(r) + " exceeds N = " +
                                       std::to_string(space.size()));
  CounterRng rng(seed);
  std::vector<std::uint8_t> mask(space.size(), 0);
  for (std::uint64_t j = space.size() - r; j < space.size(); ++j) {
    const std::uint64_t t = rng.below(j + 1);
    mask[mask[t] ? j : t] = 1;
  }
  return DenseSubset(space, std::move(mask));
}

// Each point independently with probability q.
inline DenseSubset sample_bernoulli(const Space& space, double q, std::uint64_t seed) {
  require_input(q >= 0.0 && q <= 1.0, "q must lie in [0, 1]");
  CounterRng rng(seed);
  std::vector<std::uint8_t> mask(space.size(), 0);
  for (auto& b : mask) b = rng.uniform() < q ? 1 : 0;
  return DenseSubset(space, std::move(mask));
}

struct CoupledSample {
  DenseSubset set;
  std::uint64_t first_stage = 0;   // |R1|
  std::uint64_t second_stage = 0;  // |R2| = r - |R1|
  std::uint64_t attempts = 0;      // Bernoulli draws until |R1| <= r
  bool small_top_up = false;       // |R2| <= 2 sigma^4 r
};

// R1 ~ Bernoulli((1 - sigma^4) r / N), redrawn until |R1| <= r; then R2 is a
// uniform (r - |R1|)-subset of V \ R1 and R = R1 ∪ R2 has exactly r points.
inline CoupledSample sample_coupled(const Space& space, std::uint64_t r, double sigma,
                                    std::uint64_t seed) {
  require_input(r <= space.size(), "r exceeds N");
  require_input(sigma > 0.0 && sigma < 1.0, "sigma must lie in (0, 1)");
  const double s4 = std::pow(sigma, 4);
  const double q = (1.0 - s4) * static_cast<double>(r) / space.size();
  const CounterRng root(seed);
  constexpr std::uint64_t kMaxAttempts = 1000;
  for (std::uint64_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    DenseSubset r1 = sample_bernoulli(space, q, CounterRng::derive(seed, 2 * attempt));
    if (r1.size() > r) continue;
    std::vector<Point> rest;
    rest.reserve(space.size() - r1.size());
    for (std::uint32_t i = 0; i < space.size(); ++i)
      if (!r1.contains(Point{i})) rest.push_back(Point{i});
    CounterRng rng = root.substream(2 * attempt + 1);
    const DenseSubset r2 = sample_from(space, rest, r - r1.size(), rng);
    std::vector<std::uint8_t> mask = r1.mask();
    for (Point x : r2.members()) mask[x.index] = 1;
    CoupledSample out{DenseSubset(space, std::move(mask)), r1.size(), r2.size(), attempt + 1, false};
    out.small_top_up = static_cast<double>(out.second_stage) <= 2.0 * s4 * r;
    return out;
  }
  throw ContractError("coupled sampler could not draw |R1| <= r");
}

struct FourierSupReport {
  double sup = 0.0;
  double bound = 0.0;  // |R| / (N ln N)
  bool passed = false;
};

inline FourierSupReport fourier_sup_report(const DenseSubset& r) {
  require_input(!r.empty(), "R must be nonempty");
  const double n = r.space().size();
  FourierSupReport rep;
  rep.sup = fourier_sup(r);
  rep.bound = static_cast<double>(r.size()) / (n * std::log(n));
  rep.passed = rep.sup < rep.bound;
  return rep;
}

struct TailBoundInputs {
  double q = 0.0;
  double n = 0.0;  // N
  double lambda = 0.0;
  double t = 1.0;
};

// P(X > lambda) <= exp(t^2 q N - t lambda) for X = N Re 1_R^(xi), xi != 0.
inline double chernoff_bound(const TailBoundInputs& in) {
  require_input(in.t > 0.0 && in.t <= 1.0, "t must lie in (0, 1]");
  require_input(in.q >= 0.0 && in.q <= 1.0, "q must lie in [0, 1]");
  return std::exp(in.t * in.t * in.q * in.n - in.t * in.lambda);
}

// Minimizer of t^2 q N - t lambda over (0, 1]; the bound is 1 for lambda <= 0.
inline double chernoff_best(double q, double n, double lambda) {
  if (lambda <= 0.0 || q <= 0.0) return lambda > 0.0 ? 0.0 : 1.0;
  const double t = std::min(1.0, lambda / (2.0 * q * n));
  return chernoff_bound(TailBoundInputs{q, n, lambda, t});
}

struct OptimizedTail {
  double lambda = 0.0;  // r / ln N
  double t = 0.0;       // lambda / (2 q N) = 1 / (2 ln N)
  double bound = 0.0;   // exp(-lambda^2 / (4 q N)) = exp(-r / (4 ln^2 N))
  double stated = 0.0;  // exp(-r / (2 ln^2 N)), reported next to bound
};

inline OptimizedTail optimized_tail(double r, double n) {
  require_input(r > 0.0 && n > 1.0, "need r > 0 and N > 1");
  const double q = r / n;
  const double ln = std::log(n);
  OptimizedTail o;
  o.lambda = r / ln;
  o.t = o.lambda / (2.0 * q * n);
  o.bound = chernoff_bound(TailBoundInputs{q, n, o.lambda, o.t});
  o.stated = std::exp(-r / (2.0 * ln * ln));
  return o;
}

struct EmpiricalTailReport {
  double q = 0.0;
  double lambda = 0.0;
  Point xi;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double frequency = 0.0;
  double standard_error = 0.0;
  double t_star = 0.0;
  double bound = 0.0;
  bool within_bound = false;  // frequency <= bound + 3 standard errors
};

// Frequency of { N Re 1_R^(xi) >= lambda } over Bernoulli(q) sets R.
inline EmpiricalTailReport empirical_tail(const Space& space, double q, double lambda, Point xi,
                                          std::uint64_t trials, std::uint64_t seed,
                                          unsigned threads = 1) {
  space.check(xi);
  require_input(xi.index != 0, "xi must be nonzero");
  require_input(q >= 0.0 && q <= 1.0, "q must lie in [0, 1]");
  require_input(trials >= 1, "trials must be positive");
  const auto& roots = roots_of_unity(space.p());
  // Re e(-<v, xi>/p) = cos(2 pi <v, xi> / p).
  std::vector<double> weight(space.size());
  for (std::uint32_t v = 0; v < space.size(); ++v)
    weight[v] = roots[space.pairing(Point{v}, xi)].real();

  std::vector<std::uint8_t> hit(trials, 0);
  const CounterRng root(seed);
  parallel_for(trials, threads, [&](std::size_t t) {
    CounterRng rng = root.substream(t);
    double x = 0.0;
    for (std::uint32_t v = 0; v < space.size(); ++v)
      if (rng.uniform() < q) x += weight[v];
    hit[t] = x >= lambda ? 1 : 0;
  });

  EmpiricalTailReport rep;
  rep.q = q;
  rep.lambda = lambda;
  rep.xi = xi;
  rep.trials = trials;
  rep.hits = static_cast<std::uint64_t>(std::count(hit.begin(), hit.end(), 1));
  rep.frequency = static_cast<double>(rep.hits) / trials;
  rep.standard_error = std::sqrt(rep.frequency * (1.0 - rep.frequency) / trials);
  const double n = space.size();
  rep.t_star = (lambda > 0.0 && q > 0.0) ? std::min(1.0, lambda / (2.0 * q * n)) : 0.0;
  rep.bound = chernoff_best(q, n, lambda);
  rep.within_bound = rep.frequency <= rep.bound + 3.0 * rep.standard_error;
  return rep;
}

// Dense bipartite graph with both sides of size u.
class BipartiteAdjacency {
 public:
  BipartiteAdjacency(std::uint32_t u, std::vector<std::uint8_t> adj) : u_(u), adj_(std::move(adj)) {
    require_input(adj_.size() == static_cast<std::size_t>(u) * u, "adjacency must be u x u");
  }

  static BipartiteAdjacency complete(std::uint32_t u) {
    return BipartiteAdjacency(u, std::vector<std::uint8_t>(static_cast<std::size_t>(u) * u, 1));
  }
  static BipartiteAdjacency empty(std::uint32_t u) {
    return BipartiteAdjacency(u, std::vector<std::uint8_t>(static_cast<std::size_t>(u) * u, 0));
  }
  static BipartiteAdjacency from_petal(const PetalGraph& g) {
    const std::uint32_t u = g.side();
    std::vector<std::uint8_t> adj(static_cast<std::size_t>(u) * u);
    for (std::uint32_t i = 0; i < u; ++i)
      for (std::uint32_t j = 0; j < u; ++j) adj[static_cast<std::size_t>(i) * u + j] = g.adjacent(i, j);
    return BipartiteAdjacency(u, std::move(adj));
  }

  std::uint32_t side() const { return u_; }
  bool edge(std::uint32_t i, std::uint32_t j) const { return adj_[static_cast<std::size_t>(i) * u_ + j] != 0; }
  double density() const {
    const auto e = std::count(adj_.begin(), adj_.end(), std::uint8_t{1});
    return static_cast<double>(e) / (static_cast<double>(u_) * u_);
  }

 private:
  std::uint32_t u_;
  std::vector<std::uint8_t> adj_;
};

// The adversary excludes S1 from U1 before T1 is drawn, then S2 from U2 after
// seeing T1. Each returned set must have at most u/2 vertices.
struct Adversary {
  std::string name;
  std::function<std::vector<std::uint32_t>(const BipartiteAdjacency&)> first;
  std::function<std::vector<std::uint32_t>(const BipartiteAdjacency&, const std::vector<std::uint32_t>&)>
      second;
};

inline Adversary trivial_adversary() {
  return Adversary{"trivial", [](const BipartiteAdjacency&) { return std::vector<std::uint32_t>{}; },
                   [](const BipartiteAdjacency&, const std::vector<std::uint32_t>&) {
                     return std::vector<std::uint32_t>{};
                   }};
}

namespace detail {

// The `count` highest (or lowest) scoring vertices, ties to the lower index.
inline std::vector<std::uint32_t> top_scored(const std::vector<std::uint32_t>& score, std::uint32_t count,
                                             bool highest) {
  std::vector<std::uint32_t> order(score.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return highest ? score[a] > score[b] : score[a] < score[b];
  });
  order.resize(std::min<std::size_t>(count, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

inline Adversary degree_adversary(std::string name, bool highest) {
  return Adversary{
      std::move(name),
      [highest](const BipartiteAdjacency& g) {
        std::vector<std::uint32_t> deg(g.side(), 0);
        for (std::uint32_t i = 0; i < g.side(); ++i)
          for (std::uint32_t j = 0; j < g.side(); ++j) deg[i] += g.edge(i, j);
        return top_scored(deg, g.side() / 2, highest);
      },
      [highest](const BipartiteAdjacency& g, const std::vector<std::uint32_t>& t1) {
        std::vector<std::uint32_t> hits(g.side(), 0);
        for (std::uint32_t j = 0; j < g.side(); ++j)
          for (std::uint32_t i : t1) hits[j] += g.edge(i, j);
        return top_scored(hits, g.side() / 2, highest);
      }};
}

}  // namespace detail

// Removes the floor(u/2) vertices of U1 with the smallest degree, then the
// floor(u/2) vertices of U2 with the fewest neighbours in T1.
inline Adversary greedy_adversary() { return detail::degree_adversary("greedy", false); }

// Same, but strips the best-connected vertices instead. This one actually
// works against the sampler.
inline Adversary greedy_high_adversary() { return detail::degree_adversary("greedy-high", true); }

inline Adversary adversary_by_name(const std::string& name) {
  if (name == "trivial") return trivial_adversary();
  if (name == "greedy") return greedy_adversary();
  if (name == "greedy-high") return greedy_high_adversary();
  throw InputError("unknown adversary '" + name + "' (expected trivial, greedy or greedy-high)");
}

struct Klr11Report {
  std::uint32_t u = 0;
  std::uint64_t t1 = 0, t2 = 0;
  std::string adversary;
  double density = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t no_edge = 0;
  double frequency = 0.0;
};

namespace detail {

// First t entries of a seeded Fisher-Yates shuffle of pool; prefixes nest as t grows.
inline std::vector<std::uint32_t> draw_prefix(std::vector<std::uint32_t> pool, std::uint64_t t,
                                              CounterRng rng) {
  for (std::uint64_t i = 0; i < t; ++i) {
    const std::uint64_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(t);
  return pool;
}

inline std::vector<std::uint32_t> complement(std::uint32_t u, const std::vector<std::uint32_t>& s) {
  std::vector<std::uint8_t> out(u, 0);
  for (std::uint32_t x : s) out[x] = 1;
  std::vector<std::uint32_t> rest;
  for (std::uint32_t i = 0; i < u; ++i)
    if (!out[i]) rest.push_back(i);
  return rest;
}

}  // namespace detail

// Frequency with which the random (t1, t2)-subgraph has no edge.
inline Klr11Report mc_klr11(const BipartiteAdjacency& g, std::uint64_t t1, std::uint64_t t2,
                            const Adversary& adversary, std::uint64_t trials, std::uint64_t seed,
                            unsigned threads = 1) {
  const std::uint32_t u = g.side();
  require_input(t1 >= 1 && t2 >= 1, "t1 and t2 must be positive");
  require_input(2 * t1 < u && 2 * t2 < u, "t1 and t2 must be below u/2");
  const auto s1 = adversary.first(g);
  if (2 * s1.size() > u) throw ContractError("adversary chose |S1| > u/2");
  const auto pool1 = detail::complement(u, s1);

  std::vector<std::uint8_t> empty(trials, 0);
  const CounterRng root(seed);
  parallel_for(trials, threads, [&](std::size_t t) {
    const CounterRng rng = root.substream(t);
    const auto tt1 = detail::draw_prefix(pool1, t1, rng.substream(1));
    const auto s2 = adversary.second(g, tt1);
    if (2 * s2.size() > u) throw ContractError("adversary chose |S2| > u/2");
    const auto tt2 = detail::draw_prefix(detail::complement(u, s2), t2, rng.substream(2));
    bool found = false;
    for (std::uint32_t i : tt1) {
      for (std::uint32_t j : tt2)
        if (g.edge(i, j)) {
          found = true;
          break;
        }
      if (found) break;
    }
    empty[t] = found ? 0 : 1;
  });

  Klr11Report rep;
  rep.u = u;
  rep.t1 = t1;
  rep.t2 = t2;
  rep.adversary = adversary.name;
  rep.density = g.density();
  rep.trials = trials;
  rep.no_edge = static_cast<std::uint64_t>(std::count(empty.begin(), empty.end(), 1));
  rep.frequency = trials ? static_cast<double>(rep.no_edge) / trials : 0.0;
  return rep;
}

struct DensityFailureReport {
  std::uint64_t r = 0;
  double alpha = 0.0;
  std::uint64_t outer = 0;
  std::uint64_t inner = 0;
  std::uint64_t failures = 0;  // R with at least one progression-free alpha-subset found
  double estimate = 0.0;       // lower estimate of P(R fails to be (alpha,3AP)-dense)
  std::vector<double> inner_frequencies;
};

inline DensityFailureReport mc_density_failure(const Space& space, std::uint64_t r, double alpha,
                                               std::uint64_t outer, std::uint64_t inner,
                                               std::uint64_t seed, unsigned threads = 1) {
  require_input(r <= space.size(), "r exceeds N");
  require_input(outer >= 1, "outer trials must be positive");
  DensityFailureReport rep;
  rep.r = r;
  rep.alpha = alpha;
  rep.outer = outer;
  rep.inner = inner;
  rep.inner_frequencies.assign(outer, 0.0);
  std::vector<std::uint8_t> failed(outer, 0);
  parallel_for(outer, threads, [&](std::size_t o) {
    const DenseSubset set = sample_exact(space, r, CounterRng::derive(seed, 2 * o));
    const DensityTestReport d = density_test(set, alpha, inner, CounterRng::derive(seed, 2 * o + 1));
    rep.inner_frequencies[o] = d.failure_frequency;
    failed[o] = d.failures > 0 ? 1 : 0;
  });
  rep.failures = static_cast<std::uint64_t>(std::count(failed.begin(), failed.end(), 1));
  rep.estimate = static_cast<double>(rep.failures) / outer;
  return rep;
}

}  // namespace fpreg
