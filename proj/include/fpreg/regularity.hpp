// SPDX-License-Identifier: Apache-2.0
//
// Energy-increment regularity for subsets of F_p^n.
//
// A translate v is eps-regular for A with respect to H when every nontrivial
// character of H sees A_H^v = (A + v) ∩ H with amplitude at most eps |A| / N.
// H is eps-regular for A when the irregular translates cover at most eps N
// points. If H is not regular, annihilating one witnessing frequency per
// irregular coset gives H' <= H whose energy
//     d(A, H) = (1/N) sum_v (|A_H^v| / |H|)^2 / (|A| / N)^2
// exceeds d(A, H) by at least eps^3, so the iteration from H = V stops.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fpreg/error.hpp"
#include "fpreg/fourier.hpp"
#include "fpreg/parallel.hpp"
#include "fpreg/vectorspace.hpp"

namespace fpreg {

// Amplitudes closer than this to the maximum are treated as ties, and a
// translate whose sup exceeds the regularity threshold by less than this is
// still regular. Exact spectra of 0/1 functions differ by at most rounding.
inline constexpr double kAmplitudeTolerance = 1e-12;

struct RestrictedSup {
  double value = 0.0;
  // Minimal-index frequency attaining the sup (absent when H = {0}).
  std::optional<Point> witness;
};

// sup over xi outside H^perp of |A_H^v^(xi)|, transform taken over H.
inline RestrictedSup restricted_sup_detail(const DenseSubset& a, const Subspace& h, Point v) {
  const Space& s = a.space();
  require_same_space(s, h.space());
  std::vector<Complex> data(h.size());
  for (std::uint32_t c = 0; c < h.size(); ++c)
    data[c] = a.contains(s.sub(h.elements()[c], v)) ? 1.0 : 0.0;
  transform_in_place(data, s.p(), h.dim(), -1);
  const double scale = 1.0 / h.size();
  RestrictedSup out;
  for (std::size_t k = 1; k < data.size(); ++k) out.value = std::max(out.value, std::abs(data[k]) * scale);
  for (std::size_t k = 1; k < data.size(); ++k) {
    if (std::abs(data[k]) * scale < out.value - kAmplitudeTolerance) continue;
    const Point xi = h.dual_rep(static_cast<std::uint32_t>(k));
    if (!out.witness || xi < *out.witness) out.witness = xi;
  }
  return out;
}

inline double restricted_sup(const DenseSubset& a, const Subspace& h, Point v) {
  return restricted_sup_detail(a, h, v).value;
}

struct CosetRecord {
  Point rep;
  std::uint64_t local_size = 0;  // |A_H^rep|
  double sup_value = 0.0;
  std::optional<Point> witness;
  bool regular = true;
};

struct VectorClassification {
  Subspace h;
  double eps = 0.0;
  double threshold = 0.0;  // eps |A| / N
  std::vector<CosetRecord> cosets;
  std::uint64_t irregular_mass = 0;  // |H| times the number of irregular cosets

  // eps-regular subspace: irregular translates cover at most eps N points.
  bool subspace_regular() const {
    return static_cast<double>(irregular_mass) <= eps * static_cast<double>(h.space().size()) + 1e-9;
  }
  std::uint64_t irregular_count() const {
    return static_cast<std::uint64_t>(
        std::count_if(cosets.begin(), cosets.end(), [](const CosetRecord& c) { return !c.regular; }));
  }
};

inline VectorClassification classify_vectors(const DenseSubset& a, const Subspace& h, double eps,
                                             unsigned threads = 1) {
  require_input(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  require_same_space(a.space(), h.space());
  const CosetSystem cosets(h);
  const auto sizes = localization_sizes(a, cosets);
  VectorClassification out{h, eps, eps * static_cast<double>(a.size()) / a.space().size(), {}, 0};
  out.cosets.resize(cosets.count());
  parallel_for(cosets.count(), threads, [&](std::size_t i) {
    CosetRecord& rec = out.cosets[i];
    rec.rep = cosets.reps()[i];
    rec.local_size = sizes[i];
    // Empty and full localizations have no nontrivial spectrum.
    if (sizes[i] == 0 || sizes[i] == h.size()) return;
    const RestrictedSup sup = restricted_sup_detail(a, h, rec.rep);
    rec.sup_value = sup.value;
    rec.witness = sup.witness;
    rec.regular = sup.value <= out.threshold + kAmplitudeTolerance;
  });
  for (const auto& rec : out.cosets)
    if (!rec.regular) out.irregular_mass += h.size();
  return out;
}

// d(A, H); equals 1 at H = V and N/|A| at H = {0}.
inline double energy(const DenseSubset& a, const Subspace& h) {
  require_input(!a.empty(), "energy is undefined for the empty set");
  require_same_space(a.space(), h.space());
  const CosetSystem cosets(h);
  const auto sizes = localization_sizes(a, cosets);
  // Each coset holds |H| translates with the same localization size.
  long double sum = 0.0L;
  for (std::uint64_t c : sizes) sum += static_cast<long double>(c) * c;
  const long double n = a.space().size();
  const long double hs = h.size();
  const long double dens = static_cast<long double>(a.size()) / n;
  return static_cast<double>(hs * sum / (hs * hs) / n / (dens * dens));
}

struct RefineResult {
  Subspace refined;
  std::vector<Point> witnesses;  // distinct, ascending
  double energy_before = 0.0;
  double energy_after = 0.0;
  std::uint64_t index_before = 0;
  std::uint64_t index_after = 0;
  std::uint64_t irregular_cosets = 0;
};

// One energy-increment step from an already computed classification.
inline RefineResult refine_step(const DenseSubset& a, const VectorClassification& cls) {
  if (cls.subspace_regular())
    throw ContractError("refine_step called on a subspace that is already eps-regular");
  std::vector<Point> witnesses;
  for (const auto& rec : cls.cosets)
    if (!rec.regular && rec.witness) witnesses.push_back(*rec.witness);
  std::sort(witnesses.begin(), witnesses.end());
  witnesses.erase(std::unique(witnesses.begin(), witnesses.end()), witnesses.end());
  RefineResult r{annihilator_within(cls.h, witnesses), witnesses, 0, 0, 0, 0, 0};
  r.energy_before = energy(a, cls.h);
  r.energy_after = energy(a, r.refined);
  r.index_before = cls.h.index();
  r.index_after = r.refined.index();
  r.irregular_cosets = cls.irregular_count();
  return r;
}

inline RefineResult refine_step(const DenseSubset& a, const Subspace& h, double eps,
                                unsigned threads = 1) {
  return refine_step(a, classify_vectors(a, h, eps, threads));
}

// W(1) = 2p, W(t) = (2p)^W(t-1); empty value once it exceeds 2^63.
struct TowerValue {
  std::uint64_t t = 0;
  std::optional<std::uint64_t> value;
  bool overflow() const { return !value.has_value(); }
};

inline TowerValue tower(std::uint64_t t, int p) {
  require_input(t >= 1, "tower level must be at least 1");
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 63;
  const std::uint64_t base = 2 * static_cast<std::uint64_t>(p);
  std::uint64_t value = base;
  for (std::uint64_t level = 2; level <= t; ++level) {
    std::uint64_t next = 1;
    for (std::uint64_t e = 0; e < value; ++e) {
      if (next > kLimit / base) return TowerValue{t, std::nullopt};
      next *= base;
    }
    value = next;
  }
  return TowerValue{t, value};
}

enum class StopReason { kRegular, kStepCap, kFloorHit };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::kRegular: return "regular";
    case StopReason::kStepCap: return "step_cap";
    case StopReason::kFloorHit: return "floor_hit";
  }
  return "unknown";
}

// Ambient set R with a passing (sigma, delta) certificate; enables the energy
// ceiling (1 + delta)^2 4 / alpha^2 while |H| >= sigma N.
struct CertifiedAmbient {
  double sigma = 0.0;
  double delta = 0.0;
};

struct RegularityOptions {
  double eps = 0.5;
  double alpha = 1.0;
  std::uint64_t floor = 1;  // refinements below this |H| are refused
  std::optional<CertifiedAmbient> ambient;
  unsigned threads = 1;
};

struct RefinementRecord {
  std::uint64_t step = 0;
  std::uint64_t h_size = 0;
  std::uint64_t index = 0;
  double energy = 0.0;
  std::uint64_t irregular_mass = 0;
};

struct RegularityReport {
  Subspace h_final;
  std::uint64_t iterations = 0;
  std::vector<double> energy_trace;
  std::vector<RefinementRecord> steps;
  std::vector<VectorClassification> classifications;  // final H, one per part
  bool succeeded = false;
  StopReason stop_reason = StopReason::kRegular;
  std::uint64_t step_cap = 0;
  // Index bound exponents: iteration count from the energy argument and the
  // looser 4 (eps alpha)^-2 exponent.
  double step_bound_exponent = 0.0;
  double statement_bound_exponent = 0.0;
  std::optional<double> energy_ceiling;
  bool energy_ceiling_held = true;
  bool index_growth_held = true;
};

inline std::uint64_t step_cap(double eps, double alpha, std::uint64_t m = 1) {
  const double mm = static_cast<double>(m);
  return static_cast<std::uint64_t>(std::ceil(4.0 * mm * mm / (eps * eps * eps * alpha * alpha) - 1e-9));
}

// max(1, sigma N) with sigma = 1 / (2 W(cap)); W overflows almost immediately,
// which makes the floor 1.
inline std::uint64_t default_floor(double eps, double alpha, const Space& space, std::uint64_t m = 1) {
  const TowerValue w = tower(std::max<std::uint64_t>(1, step_cap(eps, alpha, m)), space.p());
  if (w.overflow()) return 1;
  const double sigma = 1.0 / (2.0 * static_cast<double>(*w.value));
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(sigma * space.size()));
}

namespace detail {

inline bool validate_parts(const std::vector<DenseSubset>& parts) {
  require_input(!parts.empty(), "at least one part is required");
  const Space& s = parts.front().space();
  std::vector<std::uint8_t> seen(s.size(), 0);
  std::uint64_t lo = UINT64_MAX, hi = 0;
  for (const auto& part : parts) {
    require_same_space(s, part.space());
    for (Point x : part.members()) {
      require_input(!seen[x.index], "parts overlap at point " + std::to_string(x.index));
      seen[x.index] = 1;
    }
    lo = std::min<std::uint64_t>(lo, part.size());
    hi = std::max<std::uint64_t>(hi, part.size());
  }
  require_input(hi - lo <= 1, "part sizes must differ by at most one");
  return true;
}

}  // namespace detail

// Refines from H = V until H is eps-regular for every part. Each step refines
// against the first failing part; progress is measured by the summed energy.
inline RegularityReport regularize_multi(const std::vector<DenseSubset>& parts,
                                         const RegularityOptions& opt) {
  require_input(opt.eps > 0.0 && opt.eps < 1.0, "eps must lie in (0, 1)");
  require_input(opt.alpha > 0.0 && opt.alpha <= 1.0, "alpha must lie in (0, 1]");
  require_input(opt.floor >= 1, "floor must be at least 1");
  detail::validate_parts(parts);
  const Space& s = parts.front().space();
  const std::uint64_t m = parts.size();

  RegularityReport rep{Subspace::whole(s), 0, {}, {}, {}, false, StopReason::kRegular, 0, 0, 0,
                       std::nullopt, true, true};
  rep.step_cap = step_cap(opt.eps, opt.alpha, m);
  rep.step_bound_exponent = 4.0 * m * m / (opt.eps * opt.eps * opt.eps * opt.alpha * opt.alpha);
  rep.statement_bound_exponent = 4.0 * m * m / (opt.eps * opt.eps * opt.alpha * opt.alpha);
  if (opt.ambient) {
    const double d = opt.ambient->delta;
    // Each part has density alpha / m inside R, so each term is at most
    // 4 m^2 (1 + delta)^2 / alpha^2 and the sum at most m times that.
    const double mm = static_cast<double>(m);
    rep.energy_ceiling = mm * mm * mm * (1.0 + d) * (1.0 + d) * 4.0 / (opt.alpha * opt.alpha);
  }

  auto total_energy = [&](const Subspace& h) {
    double e = 0.0;
    for (const auto& part : parts)
      if (!part.empty()) e += energy(part, h);
    return e;
  };
  auto check_ceiling = [&](const Subspace& h, double e) {
    if (rep.energy_ceiling && h.size() >= opt.ambient->sigma * s.size() &&
        e > *rep.energy_ceiling + 1e-9)
      rep.energy_ceiling_held = false;
  };

  Subspace h = Subspace::whole(s);
  double current = total_energy(h);
  rep.energy_trace.push_back(current);
  check_ceiling(h, current);

  for (;;) {
    std::vector<VectorClassification> cls;
    std::optional<std::size_t> failing;
    std::uint64_t mass = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      cls.push_back(classify_vectors(parts[i], h, opt.eps, opt.threads));
      mass += cls.back().irregular_mass;
      if (!failing && !cls.back().subspace_regular()) failing = i;
    }
    if (rep.steps.empty())
      rep.steps.push_back(RefinementRecord{0, h.size(), h.index(), current, mass});
    else
      rep.steps.back().irregular_mass = mass;
    rep.classifications = std::move(cls);
    if (!failing) {
      rep.succeeded = true;
      rep.stop_reason = StopReason::kRegular;
      break;
    }
    if (rep.iterations >= rep.step_cap) {
      rep.stop_reason = StopReason::kStepCap;
      break;
    }
    const RefineResult r = refine_step(parts[*failing], rep.classifications[*failing]);
    if (r.refined.size() < opt.floor) {
      rep.stop_reason = StopReason::kFloorHit;
      break;
    }
    const std::uint64_t k = h.index();
    // |V/H'| <= |V/H| p^|V/H|, compared in logarithms.
    if (std::log(static_cast<double>(r.index_after)) >
        std::log(static_cast<double>(k)) + static_cast<double>(k) * std::log(s.p()) + 1e-9)
      rep.index_growth_held = false;
    h = r.refined;
    current = total_energy(h);
    ++rep.iterations;
    rep.energy_trace.push_back(current);
    rep.steps.push_back(RefinementRecord{rep.iterations, h.size(), h.index(), current, 0});
    check_ceiling(h, current);
  }
  rep.h_final = h;
  return rep;
}

// Single-set iteration. The empty set is vacuously regular for V.
inline RegularityReport regularize(const DenseSubset& a, const RegularityOptions& opt) {
  if (a.empty()) {
    require_input(opt.eps > 0.0 && opt.eps < 1.0, "eps must lie in (0, 1)");
    RegularityReport rep{Subspace::whole(a.space()), 0, {}, {}, {}, true, StopReason::kRegular,
                         step_cap(opt.eps, opt.alpha), 0, 0, std::nullopt, true, true};
    rep.classifications.push_back(classify_vectors(a, rep.h_final, opt.eps, opt.threads));
    rep.steps.push_back(RefinementRecord{0, a.space().size(), 1, 0.0, 0});
    return rep;
  }
  return regularize_multi(std::vector<DenseSubset>{a}, opt);
}

}  // namespace fpreg
