// SPDX-License-Identifier: Apache-2.0
//
// Cayley graph G_A on two copies of V: (x, y) is an edge when y - x lies in A.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "fpreg/error.hpp"
#include "fpreg/fourier.hpp"
#include "fpreg/rng.hpp"
#include "fpreg/vectorspace.hpp"

namespace fpreg {

// Exact count of (x, y) in X x Y with y - x in A.
inline std::uint64_t edge_count_direct(const DenseSubset& a, const DenseSubset& x,
                                       const DenseSubset& y) {
  const Space& s = a.space();
  require_same_space(s, x.space());
  require_same_space(s, y.space());
  std::uint64_t count = 0;
  if (x.size() * y.size() <= x.size() * a.size()) {
    for (Point u : x.members())
      for (Point w : y.members()) count += a.contains(s.sub(w, u));
  } else {
    for (Point u : x.members())
      for (Point d : a.members()) count += y.contains(s.add(u, d));
  }
  return count;
}

// e(X, Y) = N^2 sum_xi A^(xi) X^(xi) Y^(-xi), full-space transforms.
inline double edge_count_fourier(const DenseSubset& a, const DenseSubset& x, const DenseSubset& y) {
  require_same_space(a.space(), x.space());
  require_same_space(a.space(), y.space());
  if (a.empty() || x.empty() || y.empty()) return 0.0;
  const Spectrum as = dft(a), xs = dft(x), ys = dft(y);
  const double n = static_cast<double>(a.space().size());
  Complex acc = 0.0;
  for (std::size_t k = 0; k < as.size(); ++k) acc += as[k] * xs[k] * std::conj(ys[k]);
  return (acc * n * n).real();
}

// Picks the pair scan when it is cheap and the spectral formula otherwise.
inline std::uint64_t edge_count(const DenseSubset& a, const DenseSubset& x, const DenseSubset& y) {
  const std::uint64_t scan = x.size() * std::min<std::uint64_t>(y.size(), a.size());
  const std::uint64_t n = a.space().size();
  const std::uint64_t spectral = 3 * n * static_cast<std::uint64_t>(a.space().n()) * a.space().p();
  if (scan <= spectral) return edge_count_direct(a, x, y);
  return static_cast<std::uint64_t>(std::llround(edge_count_fourier(a, x, y)));
}

// sup over nonzero xi of |1_R^(xi)| on the full space.
inline double fourier_sup(const DenseSubset& r) {
  const Spectrum s = dft(r);
  double sup = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k) sup = std::max(sup, std::abs(s[k]));
  return sup;
}

struct RegularityCertificate {
  double sigma = 0.0;
  double delta = 0.0;
  double fourier_sup = 0.0;
  // delta * sigma * |R| / N
  double threshold = 0.0;
  bool passed = false;
};

// Certifies |e_R(X,Y) - |R||X||Y|/N| <= delta |R||X||Y|/N for all |X|,|Y| >= sigma N.
// The spectral bound sup|1_R^| (|X||Y|)^(1/2) N is tightest relative to the
// main term at |X| = |Y| = sigma N, which gives sup <= delta sigma |R| / N.
inline RegularityCertificate sigma_certificate(const DenseSubset& r, double sigma, double delta) {
  require_input(sigma > 0.0 && sigma < 1.0, "sigma must lie in (0, 1)");
  require_input(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  RegularityCertificate c;
  c.sigma = sigma;
  c.delta = delta;
  c.fourier_sup = fourier_sup(r);
  c.threshold = delta * sigma * static_cast<double>(r.size()) / r.space().size();
  c.passed = c.fourier_sup <= c.threshold;
  return c;
}

// Uniform k-subset of the given pool (Floyd's algorithm over pool positions).
inline DenseSubset sample_from(const Space& space, const std::vector<Point>& pool, std::uint64_t k,
                               CounterRng& rng) {
  require_input(k <= pool.size(), "cannot draw more elements than the pool holds");
  std::vector<std::uint8_t> picked(pool.size(), 0);
  for (std::uint64_t j = pool.size() - k; j < pool.size(); ++j) {
    const std::uint64_t t = rng.below(j + 1);
    picked[picked[t] ? j : t] = 1;
  }
  std::vector<std::uint8_t> mask(space.size(), 0);
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (picked[i]) mask[pool[i].index] = 1;
  return DenseSubset(space, std::move(mask));
}

struct PairDensityReport {
  bool applicable = false;
  std::string reason;
  // vi - vj, the translate that governs edges between vi + H and vj + H
  Point shift;
  double pair_density = 0.0;       // e(H_i, H_j) / |H|^2, counted directly
  double localized_density = 0.0;  // |A_H^{vi - vj}| / |H|
  double sup_value = 0.0;          // restricted sup at the shift
  std::uint64_t samples = 0;
  double max_ratio = 0.0;          // max deviation / bound over samples
  bool passed = false;
};

// Relative regularity of the pair (vi + H, vj + H) in G_A. An edge x -> y needs
// y - x in A; writing x = x' + vi and y = y' + vj this is y' - x' in
// (A + vi - vj) ∩ H, so the governing translate is vi - vj.
// Every sampled X ⊆ vi + H, Y ⊆ vj + H with |X|,|Y| >= eps^(1/3)|H| must satisfy
// |d(X,Y) - d(H_i,H_j)| <= eps |A| |H|^2 / (|X||Y| N).
inline PairDensityReport pair_density_check(const DenseSubset& a, const Subspace& h, Point vi,
                                            Point vj, double eps, std::uint64_t samples,
                                            std::uint64_t seed) {
  const Space& s = a.space();
  require_same_space(s, h.space());
  s.check(vi);
  s.check(vj);
  require_input(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  PairDensityReport rep;
  rep.shift = s.sub(vi, vj);

  const DenseSubset local = localize(a, h, rep.shift);
  const Spectrum spec = dft(DenseFunction::indicator(local, h), h);
  for (std::size_t k = 1; k < spec.size(); ++k)
    rep.sup_value = std::max(rep.sup_value, std::abs(spec[k]));
  const double nn = s.size();
  const double hs = h.size();
  if (a.empty() || rep.sup_value > eps * a.size() / nn + 1e-12) {
    rep.reason = "shift is not an eps-regular vector";
    return rep;
  }
  rep.applicable = true;

  std::vector<Point> hi, hj;
  for (Point x : h.elements()) {
    hi.push_back(s.add(x, vi));
    hj.push_back(s.add(x, vj));
  }
  std::sort(hi.begin(), hi.end());
  std::sort(hj.begin(), hj.end());
  const DenseSubset cell_i = DenseSubset::from_members(s, hi);
  const DenseSubset cell_j = DenseSubset::from_members(s, hj);
  rep.pair_density = edge_count_direct(a, cell_i, cell_j) / (hs * hs);
  rep.localized_density = local.size() / hs;

  const auto min_size = static_cast<std::uint64_t>(std::ceil(std::cbrt(eps) * hs - 1e-9));
  CounterRng rng(seed);
  for (std::uint64_t t = 0; t < samples; ++t) {
    CounterRng trial = rng.substream(t);
    const std::uint64_t kx = min_size + trial.below(h.size() - min_size + 1);
    const std::uint64_t ky = min_size + trial.below(h.size() - min_size + 1);
    const DenseSubset x = sample_from(s, hi, std::max<std::uint64_t>(kx, 1), trial);
    const DenseSubset y = sample_from(s, hj, std::max<std::uint64_t>(ky, 1), trial);
    const double xy = static_cast<double>(x.size()) * y.size();
    const double d = edge_count_direct(a, x, y) / xy;
    const double bound = eps * a.size() * hs * hs / (xy * nn);
    rep.max_ratio = std::max(rep.max_ratio, std::abs(d - rep.localized_density) / bound);
  }
  rep.samples = samples;
  rep.passed = rep.max_ratio <= 1.0 + 1e-12 &&
               std::abs(rep.pair_density - rep.localized_density) <= 1e-12;
  return rep;
}

struct SparseWitness {
  std::vector<Point> x;
  std::vector<Point> y;
  double density = 0.0;
};

struct SparseReport {
  bool sparse = true;
  double b = 0.0;
  double sigma = 0.0;
  double graph_density = 0.0;  // |A| / N
  double max_ratio = 0.0;      // max d(X,Y) / d(G_A) over samples
  std::uint64_t samples = 0;
  std::optional<SparseWitness> witness;
};

// Samples X, Y with |X|,|Y| >= sigma N and checks d(X,Y) <= b d(G_A). Odd-numbered
// samples probe the diagonal Y = X, where translation-structured generators
// concentrate their edges.
inline SparseReport sparse_check(const DenseSubset& a, double b, double sigma,
                                 std::uint64_t samples, std::uint64_t seed) {
  require_input(b > 0.0, "b must be positive");
  require_input(sigma > 0.0 && sigma <= 1.0, "sigma must lie in (0, 1]");
  const Space& s = a.space();
  const std::uint64_t n = s.size();
  const auto min_size = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::ceil(sigma * static_cast<double>(n) - 1e-9)));
  std::vector<Point> all(n);
  for (std::uint32_t i = 0; i < n; ++i) all[i] = Point{i};

  SparseReport rep;
  rep.b = b;
  rep.sigma = sigma;
  rep.samples = samples;
  rep.graph_density = static_cast<double>(a.size()) / static_cast<double>(n);
  CounterRng rng(seed);
  for (std::uint64_t t = 0; t < samples; ++t) {
    CounterRng trial = rng.substream(t);
    const DenseSubset x = sample_from(s, all, min_size + trial.below(n - min_size + 1), trial);
    const DenseSubset y =
        (t % 2 == 1) ? x : sample_from(s, all, min_size + trial.below(n - min_size + 1), trial);
    const double d = static_cast<double>(edge_count(a, x, y)) /
                     (static_cast<double>(x.size()) * static_cast<double>(y.size()));
    const double ratio = rep.graph_density > 0.0 ? d / rep.graph_density : 0.0;
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (d > b * rep.graph_density * (1.0 + 1e-12) && !rep.witness) {
      rep.sparse = false;
      rep.witness = SparseWitness{x.members(), y.members(), d};
    }
  }
  return rep;
}

// Bipartite graph on (H - v1, H - v2) with an edge between u1 = h1 - v1 and
// u2 = h2 - v2 when (u1 + u2) / 2 lies in A. Vertices are numbered by the
// coefficient order of H.
class PetalGraph {
 public:
  PetalGraph(DenseSubset a, Subspace h, Point v1, Point v2)
      : a_(std::move(a)), h_(std::move(h)), v1_(v1), v2_(v2) {
    require_same_space(a_.space(), h_.space());
    a_.space().check(v1);
    a_.space().check(v2);
  }

  const DenseSubset& generator() const { return a_; }
  const Subspace& subspace() const { return h_; }
  Point v1() const { return v1_; }
  Point v2() const { return v2_; }
  std::uint32_t side() const { return h_.size(); }

  Point left(std::uint32_t i) const { return a_.space().sub(h_.elements()[i], v1_); }
  Point right(std::uint32_t j) const { return a_.space().sub(h_.elements()[j], v2_); }

  bool adjacent(std::uint32_t i, std::uint32_t j) const {
    return a_.contains(a_.space().midpoint(left(i), right(j)));
  }

  // h1 + h2 sweeps H once for every h1, so the count is |H| times the number
  // of h in H with (h - v1 - v2) / 2 in A.
  std::uint64_t edge_count() const {
    const Space& s = a_.space();
    const Point shift = s.add(v1_, v2_);
    std::uint64_t hits = 0;
    for (Point x : h_.elements()) hits += a_.contains(s.half(s.sub(x, shift)));
    return hits * h_.size();
  }

  double density() const {
    const double side = h_.size();
    return static_cast<double>(edge_count()) / (side * side);
  }

 private:
  DenseSubset a_;
  Subspace h_;
  Point v1_, v2_;
};

inline PetalGraph petal_graph(const DenseSubset& a, const Subspace& h, Point v1, Point v2) {
  return PetalGraph(a, h, v1, v2);
}

}  // namespace fpreg
