// SPDX-License-Identifier: Apache-2.0
// Glue between library objects and the oracle, plus seeded generators.
#pragma once

#include <cstdint>
#include <vector>

#include "fpreg/rng.hpp"
#include "fpreg/vectorspace.hpp"
#include "oracle.hpp"

namespace support {

using fpreg::CounterRng;
using fpreg::DenseSubset;
using fpreg::Point;
using fpreg::Space;
using fpreg::Subspace;

inline oracle::Geometry geometry(const Space& s) { return oracle::Geometry(s.p(), s.n()); }

inline oracle::Mask mask(const DenseSubset& a) { return a.mask(); }

inline oracle::Mask mask(const Subspace& h) {
  oracle::Mask m(h.space().size(), 0);
  for (Point x : h.elements()) m[x.index] = 1;
  return m;
}

inline std::vector<std::uint32_t> indices(const std::vector<Point>& pts) {
  std::vector<std::uint32_t> out;
  for (Point x : pts) out.push_back(x.index);
  return out;
}

inline Point random_point(const Space& s, CounterRng& rng) {
  return Point{static_cast<std::uint32_t>(rng.below(s.size()))};
}

// Each point kept with probability `density`.
inline DenseSubset random_subset(const Space& s, CounterRng& rng, double density) {
  std::vector<std::uint8_t> m(s.size());
  for (auto& b : m) b = rng.uniform() < density ? 1 : 0;
  return DenseSubset(s, std::move(m));
}

inline DenseSubset random_nonempty(const Space& s, CounterRng& rng, double density) {
  for (;;) {
    DenseSubset a = random_subset(s, rng, density);
    if (!a.empty()) return a;
  }
}

// Span of k uniform generators, k uniform in [0, n].
inline Subspace random_subspace(const Space& s, CounterRng& rng) {
  const auto k = rng.below(static_cast<std::uint64_t>(s.n()) + 1);
  std::vector<Point> gens;
  for (std::uint64_t i = 0; i < k; ++i) gens.push_back(random_point(s, rng));
  return Subspace::span(s, gens);
}

inline Point pt(const Space& s, std::vector<int> digits) { return s.point(digits); }

}  // namespace support
