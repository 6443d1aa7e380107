// SPDX-License-Identifier: Apache-2.0
//
// JSON encoding of sets, subspaces, spectra and reports. Keys come out sorted
// and every double is rounded to 12 significant digits first, so equal inputs
// give byte-identical text.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpreg/cayley.hpp"
#include "fpreg/error.hpp"
#include "fpreg/fourier.hpp"
#include "fpreg/randmodel.hpp"
#include "fpreg/regularity.hpp"
#include "fpreg/threeap.hpp"
#include "fpreg/vectorspace.hpp"

namespace fpreg::io {

using Json = nlohmann::json;

inline double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline std::string format12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline Json num(double x) {
  if (!std::isfinite(x)) return Json(x > 0 ? "inf" : (x < 0 ? "-inf" : "nan"));
  return Json(round12(x));
}

inline double get_double(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "nan") return std::nan("");
    throw InputError("expected a number, got \"" + s + "\"");
  }
  return j.get<double>();
}

namespace detail {

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw InputError("expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw InputError(std::string("missing key \"") + key + "\"");
  return *it;
}

inline void only_keys(const Json& j, std::initializer_list<const char*> keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw InputError("unknown key \"" + it.key() + "\"");
  }
}

inline Space space_of(const Json& j) {
  return Space(field(j, "p").get<int>(), field(j, "n").get<int>());
}

inline Json opt_point(const std::optional<Point>& p) { return p ? Json(p->index) : Json(nullptr); }

inline std::optional<Point> get_opt_point(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return Point{j.get<std::uint32_t>()};
}

inline std::vector<std::uint32_t> indices(const std::vector<Point>& pts) {
  std::vector<std::uint32_t> out;
  out.reserve(pts.size());
  for (Point p : pts) out.push_back(p.index);
  return out;
}

inline std::vector<Point> points(const Space& s, const Json& j) {
  std::vector<Point> out;
  for (const auto& e : j) {
    const Point p{e.get<std::uint32_t>()};
    require_input(s.valid(p), "point index " + std::to_string(p.index) + " outside the space");
    out.push_back(p);
  }
  return out;
}

}  // namespace detail

// ---- sets and subspaces

inline Json to_json(const DenseSubset& a) {
  return Json{{"p", a.space().p()}, {"n", a.space().n()}, {"members", detail::indices(a.members())}};
}

inline DenseSubset subset_from_json(const Json& j) {
  detail::only_keys(j, {"p", "n", "members"});
  const Space s = detail::space_of(j);
  const auto pts = detail::points(s, detail::field(j, "members"));
  for (std::size_t i = 1; i < pts.size(); ++i)
    require_input(pts[i - 1] < pts[i], "members must be strictly increasing");
  return DenseSubset::from_members(s, pts);
}

inline Json to_json(const Subspace& h) {
  return Json{{"p", h.space().p()}, {"n", h.space().n()}, {"rows", h.rows()}};
}

inline Subspace subspace_from_json(const Json& j) {
  detail::only_keys(j, {"p", "n", "rows"});
  const Space s = detail::space_of(j);
  return Subspace::from_rows(s, detail::field(j, "rows").get<gf::Matrix>());
}

inline Json to_json(const Spectrum& sp) {
  Json entries = Json::array();
  for (std::size_t k = 0; k < sp.size(); ++k)
    entries.push_back(Json::array({sp.frequency(k).index, num(sp[k].real()), num(sp[k].imag())}));
  const Subspace& h = sp.base();
  return Json{{"p", h.space().p()}, {"n", h.space().n()}, {"rows", h.rows()}, {"entries", entries}};
}

inline Spectrum spectrum_from_json(const Json& j) {
  detail::only_keys(j, {"p", "n", "rows", "entries"});
  const Space s = detail::space_of(j);
  Subspace h = Subspace::from_rows(s, detail::field(j, "rows").get<gf::Matrix>());
  const Json& e = detail::field(j, "entries");
  require_input(e.size() == h.size(), "spectrum must list |H| entries");
  std::vector<Complex> values(h.size());
  std::vector<std::uint8_t> seen(h.size(), 0);
  for (const auto& row : e) {
    require_input(row.is_array() && row.size() == 3, "spectrum entries are [xi, re, im]");
    const Point xi{row[0].get<std::uint32_t>()};
    require_input(s.valid(xi), "frequency outside the space");
    const std::uint32_t k = h.dual_index(xi);
    require_input(!seen[k], "two entries for the same character");
    seen[k] = 1;
    values[k] = Complex(get_double(row[1]), get_double(row[2]));
  }
  return Spectrum(std::move(h), std::move(values));
}

// ---- fourier

inline Json to_json(const IdentityReport& r) {
  return Json{{"parseval", num(r.parseval)},
              {"plancherel", num(r.plancherel)},
              {"inversion", num(r.inversion)},
              {"convolution", num(r.convolution)},
              {"convolution_points", r.convolution_points},
              {"max", num(r.max())}};
}

// ---- regularity

inline Json to_json(const VectorClassification& c) {
  Json cosets = Json::array();
  for (const auto& rec : c.cosets)
    cosets.push_back(Json{{"rep", rec.rep.index},
                          {"local_size", rec.local_size},
                          {"sup", num(rec.sup_value)},
                          {"witness", detail::opt_point(rec.witness)},
                          {"regular", rec.regular}});
  return Json{{"eps", num(c.eps)},
              {"threshold", num(c.threshold)},
              {"irregular_mass", c.irregular_mass},
              {"irregular_count", c.irregular_count()},
              {"subspace_regular", c.subspace_regular()},
              {"cosets", cosets}};
}

inline VectorClassification classification_from_json(const Json& j, const Subspace& h) {
  VectorClassification c{h, get_double(detail::field(j, "eps")),
                         get_double(detail::field(j, "threshold")), {},
                         detail::field(j, "irregular_mass").get<std::uint64_t>()};
  for (const auto& e : detail::field(j, "cosets")) {
    CosetRecord rec;
    rec.rep = Point{detail::field(e, "rep").get<std::uint32_t>()};
    rec.local_size = detail::field(e, "local_size").get<std::uint64_t>();
    rec.sup_value = get_double(detail::field(e, "sup"));
    rec.witness = detail::get_opt_point(detail::field(e, "witness"));
    rec.regular = detail::field(e, "regular").get<bool>();
    c.cosets.push_back(rec);
  }
  return c;
}

inline Json to_json(const RefineResult& r) {
  return Json{{"refined", to_json(r.refined)},
              {"witnesses", detail::indices(r.witnesses)},
              {"energy_before", num(r.energy_before)},
              {"energy_after", num(r.energy_after)},
              {"index_before", r.index_before},
              {"index_after", r.index_after},
              {"irregular_cosets", r.irregular_cosets}};
}

inline Json to_json(const TowerValue& t) {
  return Json{{"t", t.t}, {"overflow", t.overflow()}, {"value", t.value ? Json(*t.value) : Json(nullptr)}};
}

inline StopReason stop_reason_from(const std::string& s) {
  if (s == "regular") return StopReason::kRegular;
  if (s == "step_cap") return StopReason::kStepCap;
  if (s == "floor_hit") return StopReason::kFloorHit;
  throw InputError("unknown stop reason \"" + s + "\"");
}

inline Json to_json(const RegularityReport& r) {
  Json trace = Json::array();
  for (double e : r.energy_trace) trace.push_back(num(e));
  Json steps = Json::array();
  for (const auto& st : r.steps)
    steps.push_back(Json{{"step", st.step},
                         {"h_size", st.h_size},
                         {"index", st.index},
                         {"energy", num(st.energy)},
                         {"irregular_mass", st.irregular_mass}});
  Json cls = Json::array();
  for (const auto& c : r.classifications) cls.push_back(to_json(c));
  return Json{{"h_final", to_json(r.h_final)},
              {"iterations", r.iterations},
              {"energy_trace", trace},
              {"steps", steps},
              {"classifications", cls},
              {"succeeded", r.succeeded},
              {"stop_reason", to_string(r.stop_reason)},
              {"step_cap", r.step_cap},
              {"step_bound_exponent", num(r.step_bound_exponent)},
              {"statement_bound_exponent", num(r.statement_bound_exponent)},
              {"energy_ceiling", r.energy_ceiling ? num(*r.energy_ceiling) : Json(nullptr)},
              {"energy_ceiling_held", r.energy_ceiling_held},
              {"index_growth_held", r.index_growth_held}};
}

inline RegularityReport regularity_from_json(const Json& j) {
  using detail::field;
  RegularityReport r{subspace_from_json(field(j, "h_final")), field(j, "iterations").get<std::uint64_t>(),
                     {}, {}, {}, field(j, "succeeded").get<bool>(),
                     stop_reason_from(field(j, "stop_reason").get<std::string>()),
                     field(j, "step_cap").get<std::uint64_t>(), get_double(field(j, "step_bound_exponent")),
                     get_double(field(j, "statement_bound_exponent")), std::nullopt,
                     field(j, "energy_ceiling_held").get<bool>(), field(j, "index_growth_held").get<bool>()};
  for (const auto& e : field(j, "energy_trace")) r.energy_trace.push_back(get_double(e));
  for (const auto& st : field(j, "steps"))
    r.steps.push_back(RefinementRecord{field(st, "step").get<std::uint64_t>(),
                                       field(st, "h_size").get<std::uint64_t>(),
                                       field(st, "index").get<std::uint64_t>(), get_double(field(st, "energy")),
                                       field(st, "irregular_mass").get<std::uint64_t>()});
  for (const auto& c : field(j, "classifications"))
    r.classifications.push_back(classification_from_json(c, r.h_final));
  if (!field(j, "energy_ceiling").is_null()) r.energy_ceiling = get_double(field(j, "energy_ceiling"));
  return r;
}

// ---- cayley

inline Json to_json(const RegularityCertificate& c) {
  return Json{{"sigma", num(c.sigma)},
              {"delta", num(c.delta)},
              {"fourier_sup", num(c.fourier_sup)},
              {"threshold", num(c.threshold)},
              {"passed", c.passed}};
}

inline Json to_json(const PairDensityReport& r) {
  return Json{{"applicable", r.applicable},
              {"reason", r.reason},
              {"shift", r.shift.index},
              {"pair_density", num(r.pair_density)},
              {"localized_density", num(r.localized_density)},
              {"sup", num(r.sup_value)},
              {"samples", r.samples},
              {"max_ratio", num(r.max_ratio)},
              {"passed", r.passed}};
}

inline Json to_json(const SparseReport& r) {
  Json w = nullptr;
  if (r.witness)
    w = Json{{"x", detail::indices(r.witness->x)},
             {"y", detail::indices(r.witness->y)},
             {"density", num(r.witness->density)}};
  return Json{{"sparse", r.sparse},
              {"b", num(r.b)},
              {"sigma", num(r.sigma)},
              {"graph_density", num(r.graph_density)},
              {"max_ratio", num(r.max_ratio)},
              {"samples", r.samples},
              {"witness", w}};
}

// ---- threeap

inline Json to_json(const APTriple& t, const Space& s) {
  return Json{{"a", t.a.index}, {"d", t.d.index},
              {"terms", {t.a.index, s.add(t.a, t.d).index, s.add(t.a, s.scale(2, t.d)).index}}};
}

inline Json to_json(const CapSetResult& c) {
  return Json{{"size", c.size}, {"method", c.method}, {"witness", to_json(c.witness)}};
}

inline Json to_json(const DensityTestReport& r) {
  Json w = Json::array();
  for (const auto& s : r.witnesses) w.push_back(detail::indices(s.members()));
  return Json{{"subset_size", r.subset_size},
              {"trials", r.trials},
              {"failures", r.failures},
              {"failure_frequency", num(r.failure_frequency)},
              {"witnesses", w}};
}

inline Json to_json(const Flower& f) {
  Json parts = Json::array();
  for (const auto& p : f.parts) parts.push_back(detail::indices(p.members()));
  Json petals = Json::array();
  for (const auto& pt : f.petals) petals.push_back(Json::array({pt.left.index, pt.right.index}));
  return Json{{"p", f.h.space().p()},
              {"n", f.h.space().n()},
              {"h", f.h.rows()},
              {"parts", parts},
              {"i0", f.i0},
              {"j0", f.j0},
              {"k0", f.k0},
              {"center", f.center.index},
              {"petals", petals},
              {"eps", num(f.eps)},
              {"alpha", num(f.alpha)},
              {"m", f.m}};
}

inline Flower flower_from_json(const Json& j) {
  using detail::field;
  detail::only_keys(j, {"p", "n", "h", "parts", "i0", "j0", "k0", "center", "petals", "eps", "alpha", "m"});
  const Space s = detail::space_of(j);
  Flower f{Subspace::from_rows(s, field(j, "h").get<gf::Matrix>()), {}, field(j, "i0").get<std::uint64_t>(),
           field(j, "j0").get<std::uint64_t>(), field(j, "k0").get<std::uint64_t>(),
           Point{field(j, "center").get<std::uint32_t>()}, {}, get_double(field(j, "eps")),
           get_double(field(j, "alpha")), field(j, "m").get<std::uint64_t>()};
  require_input(s.valid(f.center), "centre outside the space");
  for (const auto& p : field(j, "parts")) {
    auto pts = detail::points(s, p);
    std::sort(pts.begin(), pts.end());
    f.parts.push_back(DenseSubset::from_members(s, pts));
  }
  for (const auto& pt : field(j, "petals")) {
    require_input(pt.is_array() && pt.size() == 2, "petals are [left, right] pairs");
    const auto two = detail::points(s, pt);
    f.petals.push_back(Petal{two[0], two[1]});
  }
  return f;
}

inline Json to_json(const FlowerOutcome& o) {
  return Json{{"found", o.flower.has_value()},
              {"flower", o.flower ? to_json(*o.flower) : Json(nullptr)},
              {"failure_stage", o.failure_stage},
              {"branch", o.branch},
              {"cosets", o.cosets},
              {"shared", o.shared},
              {"candidate_sizes", o.candidate_sizes},
              {"shortfall", o.shortfall},
              {"regularity", to_json(o.regularity)}};
}

inline Json to_json(const FlowerCheck& c) { return Json{{"ok", c.ok}, {"problems", c.problems}}; }

// ---- randmodel

inline Json to_json(const FourierSupReport& r) {
  return Json{{"sup", num(r.sup)}, {"bound", num(r.bound)}, {"passed", r.passed}};
}

inline Json to_json(const OptimizedTail& o) {
  return Json{{"lambda", num(o.lambda)}, {"t", num(o.t)}, {"bound", num(o.bound)}, {"stated", num(o.stated)}};
}

inline Json to_json(const EmpiricalTailReport& r) {
  return Json{{"q", num(r.q)},
              {"lambda", num(r.lambda)},
              {"xi", r.xi.index},
              {"trials", r.trials},
              {"hits", r.hits},
              {"frequency", num(r.frequency)},
              {"standard_error", num(r.standard_error)},
              {"t_star", num(r.t_star)},
              {"bound", num(r.bound)},
              {"within_bound", r.within_bound}};
}

inline Json to_json(const Klr11Report& r) {
  return Json{{"u", r.u},
              {"t1", r.t1},
              {"t2", r.t2},
              {"adversary", r.adversary},
              {"density", num(r.density)},
              {"trials", r.trials},
              {"no_edge", r.no_edge},
              {"frequency", num(r.frequency)}};
}

inline Json to_json(const DensityFailureReport& r) {
  Json inner = Json::array();
  for (double f : r.inner_frequencies) inner.push_back(num(f));
  return Json{{"r", r.r},
              {"alpha", num(r.alpha)},
              {"outer", r.outer},
              {"inner", r.inner},
              {"failures", r.failures},
              {"estimate", num(r.estimate)},
              {"inner_frequencies", inner}};
}

inline Json to_json(const CoupledSample& c) {
  return Json{{"size", c.set.size()},
              {"first_stage", c.first_stage},
              {"second_stage", c.second_stage},
              {"attempts", c.attempts},
              {"small_top_up", c.small_top_up}};
}

// ---- files

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

}  // namespace fpreg::io
