// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference computations for the tests. Nothing here calls into
// the library: points are decoded digit by digit, subspaces are membership
// vectors built by closure, and every sum is taken literally.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <set>
#include <vector>

namespace oracle {

struct Geometry {
  int p;
  int n;
  std::uint32_t size;

  Geometry(int p_, int n_) : p(p_), n(n_), size(1) {
    for (int i = 0; i < n; ++i) size *= static_cast<std::uint32_t>(p);
  }

  std::vector<int> digits(std::uint32_t x) const {
    std::vector<int> d(n);
    for (int i = 0; i < n; ++i) {
      d[i] = static_cast<int>(x % p);
      x /= p;
    }
    return d;
  }

  std::uint32_t index(const std::vector<int>& d) const {
    std::uint32_t x = 0;
    for (int i = n - 1; i >= 0; --i) x = x * p + static_cast<std::uint32_t>(((d[i] % p) + p) % p);
    return x;
  }

  std::uint32_t lin(int a, std::uint32_t x, int b, std::uint32_t y) const {
    auto dx = digits(x), dy = digits(y);
    for (int i = 0; i < n; ++i) dx[i] = a * dx[i] + b * dy[i];
    return index(dx);
  }

  std::uint32_t add(std::uint32_t x, std::uint32_t y) const { return lin(1, x, 1, y); }
  std::uint32_t sub(std::uint32_t x, std::uint32_t y) const { return lin(1, x, -1, y); }

  int dot(std::uint32_t x, std::uint32_t y) const {
    const auto dx = digits(x), dy = digits(y);
    int s = 0;
    for (int i = 0; i < n; ++i) s += dx[i] * dy[i];
    return s % p;
  }

  std::complex<double> chi(std::uint32_t x, std::uint32_t xi, int sign) const {
    const double angle = sign * 2.0 * std::numbers::pi * dot(x, xi) / p;
    return {std::cos(angle), std::sin(angle)};
  }
};

using Mask = std::vector<std::uint8_t>;

inline Mask span(const Geometry& g, const std::vector<std::uint32_t>& gens) {
  Mask in(g.size, 0);
  in[0] = 1;
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::uint32_t x = 0; x < g.size; ++x) {
      if (!in[x]) continue;
      for (std::uint32_t v : gens) {
        const std::uint32_t y = g.add(x, v);
        if (!in[y]) {
          in[y] = 1;
          grew = true;
        }
      }
    }
  }
  return in;
}

inline std::uint32_t count(const Mask& m) {
  std::uint32_t c = 0;
  for (auto b : m) c += b;
  return c;
}

inline Mask annihilator(const Geometry& g, const Mask& h, const std::vector<std::uint32_t>& freqs) {
  Mask out(g.size, 0);
  for (std::uint32_t x = 0; x < g.size; ++x) {
    if (!h[x]) continue;
    bool ok = true;
    for (std::uint32_t xi : freqs) ok = ok && g.dot(x, xi) == 0;
    out[x] = ok;
  }
  return out;
}

// Minimal element of each coset, ascending.
inline std::vector<std::uint32_t> coset_reps(const Geometry& g, const Mask& h) {
  std::set<std::uint32_t> reps;
  for (std::uint32_t v = 0; v < g.size; ++v) {
    std::uint32_t best = v;
    for (std::uint32_t x = 0; x < g.size; ++x)
      if (h[x]) best = std::min(best, g.add(v, x));
    reps.insert(best);
  }
  return {reps.begin(), reps.end()};
}

// |(A + v) ∩ H|
inline std::uint32_t local_size(const Geometry& g, const Mask& a, const Mask& h, std::uint32_t v) {
  std::uint32_t c = 0;
  for (std::uint32_t x = 0; x < g.size; ++x)
    if (a[x] && h[g.add(x, v)]) ++c;
  return c;
}

// Mean over all v in V of (|A_H^v| / |H|)^2, divided by (|A| / N)^2.
inline double energy(const Geometry& g, const Mask& a, const Mask& h) {
  const double hs = count(h), n = g.size, dens = count(a) / n;
  double sum = 0.0;
  for (std::uint32_t v = 0; v < g.size; ++v) {
    const double d = local_size(g, a, h, v) / hs;
    sum += d * d;
  }
  return sum / n / (dens * dens);
}

// E_{x in H} f(x) e(-<x, xi>/p) for f given on all of V.
inline std::complex<double> fourier(const Geometry& g, const std::vector<double>& f, const Mask& h,
                                    std::uint32_t xi) {
  std::complex<double> acc = 0.0;
  for (std::uint32_t x = 0; x < g.size; ++x)
    if (h[x]) acc += f[x] * g.chi(x, xi, -1);
  return acc / static_cast<double>(count(h));
}

// Literal definition E_{x in H} f(x) g(y - x) at a point y of H.
inline double convolution(const Geometry& g, const std::vector<double>& f, const std::vector<double>& k,
                          const Mask& h, std::uint32_t y) {
  double acc = 0.0;
  for (std::uint32_t x = 0; x < g.size; ++x)
    if (h[x]) acc += f[x] * k[g.sub(y, x)];
  return acc / count(h);
}

// Ordered pairs (a, d) with a, a + d, a + 2d all in A; d = 0 included.
inline std::uint64_t progressions(const Geometry& g, const Mask& a) {
  std::uint64_t c = 0;
  for (std::uint32_t x = 0; x < g.size; ++x) {
    if (!a[x]) continue;
    for (std::uint32_t d = 0; d < g.size; ++d)
      if (a[g.add(x, d)] && a[g.lin(1, x, 2, d)]) ++c;
  }
  return c;
}

inline bool progression_free(const Geometry& g, const Mask& a) {
  return progressions(g, a) == count(a);
}

// #{(x, y) in X x Y : y - x in A}
inline std::uint64_t edges(const Geometry& g, const Mask& a, const Mask& x, const Mask& y) {
  std::uint64_t c = 0;
  for (std::uint32_t u = 0; u < g.size; ++u)
    if (x[u])
      for (std::uint32_t w = 0; w < g.size; ++w)
        if (y[w] && a[g.sub(w, u)]) ++c;
  return c;
}

}  // namespace oracle
