// SPDX-License-Identifier: Apache-2.0
//
// Discrete Fourier analysis on V = F_p^n and on subspaces H <= V.
//
// The transform of f with respect to H is
//     f^(xi) = E_{x in H} f(x) e(-<x, xi>/p),   e(z) = exp(2 pi i z).
// Characters of H are indexed by V/H^perp; a spectrum stores one entry per
// coset, in the order of Subspace::dual_index, and reports the minimal-index
// frequency of each coset. Computation goes through the coordinatization
// H ~ F_p^dim and runs dim sequential length-p passes.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "fpreg/error.hpp"
#include "fpreg/vectorspace.hpp"

namespace fpreg {

using Complex = std::complex<double>;

// e(k/p) for k in [0, p), evaluated in extended precision once per prime.
inline const std::vector<Complex>& roots_of_unity(int p) {
  static const auto table = [] {
    std::vector<std::vector<Complex>> t(kMaxPrime + 1);
    for (int q = 2; q <= kMaxPrime; ++q) {
      for (int k = 0; k < q; ++k) {
        const long double angle = 2.0L * std::numbers::pi_v<long double> * k / q;
        t[q].emplace_back(static_cast<double>(std::cos(angle)),
                          static_cast<double>(std::sin(angle)));
      }
    }
    return t;
  }();
  return table[p];
}

// In place: data[eta] <- sum_c data[c] e(sign * <c, eta> / p) over F_p^dim,
// indices little-endian base p.
inline void transform_in_place(std::span<Complex> data, int p, int dim, int sign) {
  const auto& w = roots_of_unity(p);
  std::vector<Complex> line(p), out(p);
  std::size_t stride = 1;
  for (int axis = 0; axis < dim; ++axis) {
    const std::size_t block = stride * p;
    for (std::size_t base = 0; base < data.size(); base += block) {
      for (std::size_t off = 0; off < stride; ++off) {
        for (int j = 0; j < p; ++j) line[j] = data[base + off + j * stride];
        for (int k = 0; k < p; ++k) {
          Complex acc = 0.0;
          for (int j = 0; j < p; ++j) {
            const int e = ((sign > 0 ? j * k : -j * k) % p + p) % p;
            acc += line[j] * w[e];
          }
          out[k] = acc;
        }
        for (int k = 0; k < p; ++k) data[base + off + k * stride] = out[k];
      }
    }
    stride = block;
  }
}

// A real function on a subspace (the whole space when no support is given).
// values[c] is the value at support.elements()[c].
class DenseFunction {
 public:
  DenseFunction(Subspace support, std::vector<double> values)
      : support_(std::move(support)), values_(std::move(values)) {
    require_input(values_.size() == support_.size(),
                  "function table length does not match its support");
    for (double v : values_) require_input(std::isfinite(v), "function values must be finite");
  }

  static DenseFunction on_space(const Space& space, std::vector<double> values) {
    return DenseFunction(Subspace::whole(space), std::move(values));
  }

  static DenseFunction indicator(const DenseSubset& a, const Subspace& h) {
    require_same_space(a.space(), h.space());
    std::vector<double> v(h.size());
    for (std::uint32_t c = 0; c < h.size(); ++c) v[c] = a.contains(h.elements()[c]) ? 1.0 : 0.0;
    return DenseFunction(h, std::move(v));
  }

  static DenseFunction indicator(const DenseSubset& a) {
    return indicator(a, Subspace::whole(a.space()));
  }

  const Subspace& support() const { return support_; }
  const Space& space() const { return support_.space(); }
  const std::vector<double>& values() const& { return values_; }
  std::vector<double> values() && { return std::move(values_); }

  double at(Point x) const {
    require_input(support_.contains(x), "point outside the function's support");
    return values_[support_.coordinates(x)];
  }

  DenseFunction restrict_to(const Subspace& h) const {
    require_same_space(space(), h.space());
    if (h == support_) return *this;
    require_input(h.is_subspace_of(support_), "restriction target is not inside the support");
    std::vector<double> v(h.size());
    for (std::uint32_t c = 0; c < h.size(); ++c) v[c] = at(h.elements()[c]);
    return DenseFunction(h, std::move(v));
  }

 private:
  Subspace support_;
  std::vector<double> values_;
};

class Spectrum {
 public:
  Spectrum(Subspace base, std::vector<Complex> entries)
      : base_(std::move(base)), entries_(std::move(entries)) {
    require_input(entries_.size() == base_.size(), "spectrum must have |H| entries");
  }

  const Subspace& base() const { return base_; }
  const std::vector<Complex>& entries() const& { return entries_; }
  std::vector<Complex> entries() && { return std::move(entries_); }
  std::size_t size() const { return entries_.size(); }

  // Canonical frequency of entry k.
  Point frequency(std::size_t k) const { return base_.dual_rep(static_cast<std::uint32_t>(k)); }
  // Value at any xi in V; depends on xi only through xi + H^perp.
  Complex at(Point xi) const { return entries_[base_.dual_index(xi)]; }
  const Complex& operator[](std::size_t k) const { return entries_[k]; }

 private:
  Subspace base_;
  std::vector<Complex> entries_;
};

inline Spectrum dft(const DenseFunction& f, const Subspace& h) {
  const DenseFunction g = f.restrict_to(h);
  std::vector<Complex> data(g.values().begin(), g.values().end());
  transform_in_place(data, h.space().p(), h.dim(), -1);
  const double scale = 1.0 / static_cast<double>(h.size());
  for (auto& z : data) z *= scale;
  return Spectrum(h, std::move(data));
}

inline Spectrum dft(const DenseFunction& f) { return dft(f, f.support()); }

// Full-space transform of an indicator.
inline Spectrum dft(const DenseSubset& a) { return dft(DenseFunction::indicator(a)); }

// f(x) = sum_xi f^(xi) e(<x, xi>); imaginary residue is discarded.
inline DenseFunction idft(const Spectrum& s) {
  std::vector<Complex> data = s.entries();
  transform_in_place(data, s.base().space().p(), s.base().dim(), +1);
  std::vector<double> values(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) values[i] = data[i].real();
  return DenseFunction(s.base(), std::move(values));
}

// f*g(h) = E_{x in H} f(x) g(h - x), through the convolution theorem.
inline DenseFunction convolve(const DenseFunction& f, const DenseFunction& g, const Subspace& h) {
  require_same_space(f.space(), g.space());
  const Spectrum fs = dft(f, h);
  const Spectrum gs = dft(g, h);
  std::vector<Complex> prod(h.size());
  for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = fs[k] * gs[k];
  return idft(Spectrum(h, std::move(prod)));
}

struct IdentityReport {
  double parseval = 0.0;
  double plancherel = 0.0;
  double inversion = 0.0;
  double convolution = 0.0;
  // Points at which the convolution theorem was checked against the definition.
  std::uint32_t convolution_points = 0;

  double max() const {
    return std::max(std::max(parseval, plancherel), std::max(inversion, convolution));
  }
};

// Residuals of Parseval, Plancherel, inversion and the convolution theorem on H.
// The convolution theorem is checked by comparing the definition of f*g with
// the inverse transform of f^ g^. The definition costs |H| per point, so for
// |H| > direct_limit only direct_limit evenly spaced points are checked.
inline IdentityReport identity_suite(const DenseFunction& f0, const DenseFunction& g0,
                                     const Subspace& h, std::uint32_t direct_limit = 256) {
  const DenseFunction f = f0.restrict_to(h);
  const DenseFunction g = g0.restrict_to(h);
  const Spectrum fs = dft(f, h);
  const Spectrum gs = dft(g, h);
  const double size = static_cast<double>(h.size());
  IdentityReport r;

  double ff = 0.0, fg = 0.0;
  for (std::size_t c = 0; c < h.size(); ++c) {
    ff += f.values()[c] * f.values()[c];
    fg += f.values()[c] * g.values()[c];
  }
  ff /= size;
  fg /= size;
  double spec_ff = 0.0;
  Complex spec_fg = 0.0;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    spec_ff += std::norm(fs[k]);
    spec_fg += fs[k] * std::conj(gs[k]);
  }
  r.parseval = std::abs(ff - spec_ff);
  r.plancherel = std::abs(Complex(fg) - spec_fg);

  const DenseFunction back = idft(fs);
  for (std::size_t c = 0; c < h.size(); ++c)
    r.inversion = std::max(r.inversion, std::abs(back.values()[c] - f.values()[c]));

  std::vector<Complex> prod(h.size());
  for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = fs[k] * gs[k];
  const DenseFunction spectral = idft(Spectrum(h, std::move(prod)));
  const Space& s = h.space();
  const std::uint32_t points = std::min(h.size(), direct_limit);
  const std::uint32_t step = h.size() / points;
  for (std::uint32_t i = 0; i < points; ++i) {
    const std::uint32_t c = i * step;
    const Point target = h.elements()[c];
    double acc = 0.0;
    for (std::uint32_t j = 0; j < h.size(); ++j) {
      const Point x = h.elements()[j];
      acc += f.values()[j] * g.values()[h.coordinates(s.sub(target, x))];
    }
    acc /= size;
    r.convolution = std::max(r.convolution, std::abs(acc - spectral.values()[c]));
  }
  r.convolution_points = points;
  return r;
}

}  // namespace fpreg
