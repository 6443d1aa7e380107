// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpreg/cayley.hpp"
#include "fpreg/fourier.hpp"
#include "fpreg/io.hpp"
#include "fpreg/randmodel.hpp"
#include "fpreg/regularity.hpp"
#include "fpreg/threeap.hpp"
#include "fpreg/vectorspace.hpp"

namespace fpreg::cli {
namespace {

using io::Json;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Outcome {
  Json result;
  Table table;
};

std::string cell(double x) { return io::format12(x); }
std::string cell(bool b) { return b ? "true" : "false"; }
std::string cell(const std::string& s) { return s; }
template <typename T>
  requires std::is_integral_v<T>
std::string cell(T x) {
  return std::to_string(x);
}

template <typename... Ts>
std::vector<std::string> row(const Ts&... xs) {
  return {cell(xs)...};
}

// Every option any subcommand can take; each subcommand binds the ones it uses.
struct Params {
  int p = 0, n = 0;
  std::string set_file, members;
  std::int64_t random = -1;
  std::uint64_t seed = 0;
  double eps = 0.5, alpha = 1.0, sigma = 0.1, delta = 0.5;
  std::uint64_t floor = 0;
  std::uint64_t m = 3;
  std::uint64_t trials = 100;
  std::uint32_t direct_limit = 256;
  std::string ambient_file, flower_file, flower_out, manifest;
  double q = 0.05, lambda = 1.0, t = 0.0;
  std::uint32_t xi = 1;
  std::string graph = "complete", adversary = "trivial";
  std::uint32_t u = 16;
  std::uint64_t t1 = 1, t2 = 1;
  double density = 0.5;
  int h_dim = 0;
  std::uint64_t level = 1;
  std::uint64_t r = 0;
  double c = 0.0;
  std::uint64_t outer = 20, inner = 50;

  std::string out, format = "structured";
  unsigned threads = 1;
  bool timing = false;
};

struct Command {
  CLI::App* app = nullptr;
  CLI::Option* seed = nullptr;
  std::function<Outcome()> run;
};

// ---- option helpers

CLI::Option* add_seed(CLI::App* sub, Params& prm, bool required) {
  auto* o = sub->add_option("--seed", prm.seed, "RNG seed");
  if (required) o->required();
  return o;
}

void add_space(CLI::App* sub, Params& prm, bool required) {
  auto* p = sub->add_option("--p", prm.p, "odd prime in [3, 13]");
  auto* n = sub->add_option("--n", prm.n, "dimension in [1, 12]");
  if (required) {
    p->required();
    n->required();
  }
}

void add_set(CLI::App* sub, Params& prm) {
  add_space(sub, prm, false);
  auto* f = sub->add_option("--set", prm.set_file, "JSON file {p, n, members}");
  auto* mem = sub->add_option("--members", prm.members, "comma-separated point indices");
  auto* rnd = sub->add_option("--random", prm.random, "uniform random set of this size (needs --seed)");
  f->excludes(mem)->excludes(rnd);
  mem->excludes(rnd);
}

std::vector<Point> parse_members(const std::string& text) {
  std::vector<Point> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(tok, &used);
    } catch (const std::exception&) {
      throw InputError("bad member \"" + tok + "\"");
    }
    if (tok.find_first_not_of(" \t", used) != std::string::npos) throw InputError("bad member \"" + tok + "\"");
    out.push_back(Point{static_cast<std::uint32_t>(v)});
  }
  return out;
}

DenseSubset resolve_set(const Params& prm, const Command& cmd) {
  if (!prm.set_file.empty()) {
    DenseSubset a = io::subset_from_json(io::read_json_file(prm.set_file));
    require_input(prm.p == 0 || prm.p == a.space().p(), "--p disagrees with the set file");
    require_input(prm.n == 0 || prm.n == a.space().n(), "--n disagrees with the set file");
    return a;
  }
  require_input(prm.p != 0 && prm.n != 0, "--p and --n are required without --set");
  const Space s(prm.p, prm.n);
  if (prm.random >= 0) {
    require_input(cmd.seed && cmd.seed->count() > 0, "--random needs --seed");
    return sample_exact(s, static_cast<std::uint64_t>(prm.random), prm.seed);
  }
  require_input(!prm.members.empty(), "give the set with --set, --members or --random");
  auto pts = parse_members(prm.members);
  for (Point x : pts) require_input(s.valid(x), "member " + std::to_string(x.index) + " outside the space");
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return DenseSubset::from_members(s, pts);
}

RegularityOptions regularity_options(const Params& prm, const Space& s, std::uint64_t m) {
  RegularityOptions opt;
  opt.eps = prm.eps;
  opt.alpha = prm.alpha;
  require_input(opt.eps > 0.0 && opt.eps < 1.0, "eps must lie in (0, 1)");
  require_input(opt.alpha > 0.0 && opt.alpha <= 1.0, "alpha must lie in (0, 1]");
  opt.floor = prm.floor ? prm.floor : default_floor(opt.eps, opt.alpha, s, m);
  opt.threads = prm.threads;
  return opt;
}

Table regularity_rows(const RegularityReport& r) {
  Table t{{"step", "h_size", "index", "energy", "irregular_mass"}, {}};
  for (const auto& st : r.steps) t.rows.push_back(row(st.step, st.h_size, st.index, st.energy, st.irregular_mass));
  return t;
}

// ---- subcommands

void add_fourier_check(CLI::App& app, Params& prm, std::map<std::string, Command>& cmds) {
  Command c;
  c.app = app.add_subcommand("fourier-check", "Parseval, Plancherel, inversion and convolution residuals");
  add_space(c.app, prm, true);
  c.app->add_option("--trials", prm.trials, "random (f, g, H) triples");
  c.app->add_option("--direct-limit", prm.direct_limit, "convolution points compared with the definition");
  c.seed = add_seed(c.app, prm, true);
  c.run = [&prm] {
    const Space s(prm.p, prm.n);
    require_input(prm.direct_limit >= 1, "--direct-limit must be positive");
    const CounterRng root(prm.seed);
    IdentityReport worst;
    Outcome o;
    o.table.header = {"trial", "dim_h", "parseval", "plancherel", "inversion", "convolution"};
    for (std::uint64_t t = 0; t < prm.trials; ++t) {
      CounterRng rng = root.substream(t);
      const auto k = rng.below(static_cast<std::uint64_t>(s.n()) + 1);
      std::vector<Point> gens;
      for (std::uint64_t i = 0; i < k; ++i) gens.push_back(Point{static_cast<std::uint32_t>(rng.below(s.size()))});
      const Subspace h = Subspace::span(s, gens);
      std::vector<double> f(s.size()), g(s.size());
      for (auto& x : f) x = 2.0 * rng.uniform() - 1.0;
      for (auto& x : g) x = 2.0 * rng.uniform() - 1.0;
      const IdentityReport r = identity_suite(DenseFunction::on_space(s, f), DenseFunction::on_space(s, g), h,
                                              prm.direct_limit);
      worst.parseval = std::max(worst.parseval, r.parseval);
      worst.plancherel = std::max(worst.plancherel, r.plancherel);
      worst.inversion = std::max(worst.inversion, r.inversion);
      worst.convolution = std::max(worst.convolution, r.convolution);
      worst.convolution_points = std::max(worst.convolution_points, r.convolution_points);
      o.table.rows.push_back(row(t, h.dim(), r.parseval, r.plancherel, r.inversion, r.convolution));
    }
    o.result = Json{{"trials", prm.trials}, {"max_residuals", io::to_json(worst)},
                    {"tolerance", 1e-9}, {"passed", worst.max() <= 1e-9}};
    return o;
  };
  cmds["fourier-check"] = c;
}

void add_regularize(CLI::App& app, Params& prm, std::map<std::string, Command>& cmds) {
  Command c;
  c.app = app.add_subcommand("regularize", "energy-increment regularization of one set");
  add_set(c.app, prm);
  c.app->add_option("--eps", prm.eps, "regularity parameter");
  c.app->add_option("--alpha", prm.alpha, "density of A inside the ambient set");
  c.app->add_option("--floor", prm.floor, "smallest allowed |H| (0 = derived from the tower bound)");
  c.app->add_option("--ambient", prm.ambient_file, "certified ambient set R (JSON); enables the energy ceiling");
  c.app->add_option("--sigma", prm.sigma, "certificate sigma for --ambient");
  c.app->add_option("--delta", prm.delta, "certificate delta for --ambient");
  c.seed = add_seed(c.app, prm, false);
  Command* self = &cmds["regularize"];
  c.run = [&prm, self] {
    const DenseSubset a = resolve_set(prm, *self);
    RegularityOptions opt = regularity_options(prm, a.space(), 1);
    Json cert = nullptr;
    if (!prm.ambient_file.empty()) {
      const DenseSubset r = io::subset_from_json(io::read_json_file(prm.ambient_file));
      require_same_space(a.space(), r.space());
      for (Point x : a.members()) require_input(r.contains(x), "A is not contained in the ambient set");
      const RegularityCertificate rc = sigma_certificate(r, prm.sigma, prm.delta);
      cert = io::to_json(rc);
      if (rc.passed) opt.ambient = CertifiedAmbient{prm.sigma, prm.delta};
    }
    const RegularityReport rep = regularize(a, opt);
    Outcome o;
    o.result = Json{{"set_size", a.size()}, {"floor", opt.floor}, {"certificate", cert},
                    {"regularity", io::to_json(rep)}};
    o.table = regularity_rows(rep);
    return o;
  };
  *self = c;
}

void add_regularize_multi(CLI::App& app, Params& prm, std::map<std::string, Command>& cmds) {
  Command c;
  c.app = app.add_subcommand("regularize-multi", "one subspace regular for every part of a canonical split");
  add_set(c.app, prm);
  c.app->add_option("--m", prm.m, "number of parts");
  c.app->add_option("--eps", prm.eps, "regularity parameter");
  c.app->add_option("--alpha", prm.alpha, "density of A inside the ambient set");
  c.app->add_option("--floor", prm.floor, "smallest allowed |H| (0 = derived from the tower bound)");
  c.seed = add_seed(c.app, prm, false);
  Command* self = &cmds["regularize-multi"];
  c.run = [&prm, self] {
    const DenseSubset a = resolve_set(prm, *self);
    require_input(prm.m >= 1 && prm.m <= a.size(), "m must lie in [1, |A|]");
    const auto parts = split_parts(a, prm.m);
    const RegularityOptions opt = regularity_options(prm, a.space(), prm.m);
    const RegularityReport rep = regularize_multi(parts, opt);
    std::vector<std::uint64_t> sizes;
    for (const auto& part : parts) sizes.push_back(part.size());
    Outcome o;
    o.result = Json{{"set_size", a.size()}, {"part_sizes", sizes}, {"floor", opt.floor},
                    {"regularity", io::to_json(rep)}};
    o.table = regularity_rows(rep);
    return o;
  };
  *self = c;
}

void add_roth_count(CLI::App& app, Params& prm, std::map<std::string, Command>& cmds) {
  Command c;
  c.app = app.add_subcommand("roth-count", "3AP count by enumeration and by the Fourier formula");
  add_set(c.app, prm);
  c.seed = add_seed(c.app, prm, false);
  Command* self = &cmds["roth-count"];
  c.run = [&prm, self] {
    const DenseSubset a = resolve_set(prm, *self);
    const std::uint64_t naive = count_3aps_naive(a, true);
    const std::uint64_t spectral = count_3aps_fourier(a);
    const auto w = find_nontrivial_3ap(a);
    Outcome o;
    o.result = Json{{"set_size", a.size()},
                    {"count_naive", naive},
                    {"count_fourier", spectral},
                    {"agree", naive == spectral},
                    {"nontrivial", naive - a.size()},
                    {"witness", w ? io::to_json(*w, a.space()) : Json(nullptr)}};
    o.table = {{"set_size", "count_naive", "count_fourier", "nontrivial"},
               {row(a.size(), naive, spectral, naive - a.size())}};
    return o;
  };
  *self = c;
}

void add_capset(CLI::App& app, Params& prm, std::map<std::string, Command>& cmds) {
  Command c;
  c.app = app.add_subcommand("capset", "largest progression-free set by exhaustive search (N <= 27)");
  add_space(c.app, prm, true);
  c.run = [&prm] {
    const CapSetResult r = capset_max_exhaustive(prm.p, prm.n);
    Outcome o;
    o.result = io::to_json(r);
    o.table = {{"p", "n", "size", "method"}, {row(prm.p, prm.n, r.size, r.method)}};
    return o;
  };
  cmds["capset"] = c;
}

void add_density_test(CLI::App& app, Params& prm, std::map<std::string, Command>& cmds) {
  Command c;
  c.app = app.add_subcommand("density-test", "sample alpha-subsets of R and look for progression-free ones");
  add_set(c.app, prm);
  c.app->add_option("--alpha", prm.alpha, "relative subset size");
  c.app->add_option("--trials", prm.trials, "subsets sampled");
  c.seed = add_seed(c.app, prm, true);
  Command* self = &cmds["density-test"];
  c.run = [&prm, self] {
    const DenseSubset r = resolve_set(prm, *self);
    const DensityTestReport rep = density_test(r, prm.alpha, prm.trials, CounterRng::derive(prm.seed, 1));
    Outcome o;
    o.result = Json{{"set_size", r.size()}, {"density_test", io::to_json(rep)}};
    o.table = {{"subset_size", "trials", "failures", "failure_frequency"},
               {row(rep.subset_size, rep.trials, rep.failures, rep.failure_frequency)}};
    return o;
  };
  *self = c;
}

void add_flower_find(CLI::App& app, Params& prm, std::map<std::string, Command>& cmds) {
  Command c;
  c.app = app.add_subcommand("flower-find", "split, regularize and search for a flower");
  add_set(c.app, prm);
  c.app->add_option("--m", prm.m, "number of parts (>= 3)");
  c.app->add_option("--eps", prm.eps, "regularity parameter");
  c.app->add_option("--alpha", prm.alpha, "density parameter");
  c.app->add_option("--floor", prm.floor, "smallest allowed |H| (0 = derived from the tower bound)");
  c.app->add_option("--flower-out", prm.flower_out, "also write the flower alone (JSON) for flower-validate");
  c.seed = add_seed(c.app, prm, false);
  Command* self = &cmds["flower-find"];
  c.run = [&prm, self] {
    const DenseSubset a = resolve_set(prm, *self);
    const RegularityOptions opt = regularity_options(prm, a.space(), prm.m);
    const FlowerOutcome out = flower_find(a, prm.m, opt);
    if (!prm.flower_out.empty()) {
      require_input(out.flower.has_value(), "no flower found; nothing to write to --flower-out");
      io::write_text_file(prm.flower_out, io::dump(io::to_json(*out.flower)));
    }
    Outcome o;
    o.result = io::to_json(out);
    o.table.header = {"petal", "left", "right"};
    if (out.flower)
      for (std::size_t l = 0; l < out.flower->petals.size(); ++l)
        o.table.rows.push_back(row(l, out.flower->petals[l].left.index, out.flower->petals[l].right.index));
    return o;
  };
  *self = c;
}

void add_flower_validate(CLI::App& app, Params& prm, std::map<std::string, Command>& cmds) {
  Command c;
  c.app = app.add_subcommand("flower-validate", "recheck every flower property from scratch");
  c.app->add_option("--flower", prm.flower_file, "flower JSON written by flower-find --flower-out")->required();
  c.run = [&prm] {
    const Flower f = io::flower_from_json(io::read_json_file(prm.flower_file));
    const FlowerCheck chk = validate_flower(f);
    Outcome o;
    o.result = io::to_json(chk);
    o.table.header = {"problem"};
    for (const auto& p : chk.problems) o.table.rows.push_back({p});
    return o;
  };
  cmds["flower-validate"] = c;
}

void add_sigma_cert(CLI::App& app, Params& prm, std::map<std::string, Command>& cmds) {
  Command c;
  c.app = app.add_subcommand("sigma-cert", "spectral (sigma, delta) certificate for R");
  add_set(c.app, prm);
  c.app->add_option("--sigma", prm.sigma, "minimum relative size of X and Y");
  c.app->add_option("--delta", prm.delta, "relative edge-count error");
  c.seed = add_seed(c.app, prm, false);
  Command* self = &cmds["sigma-cert"];
  c.run = [&prm, self] {
    const DenseSubset r = resolve_set(prm, *self);
    const RegularityCertificate rc = sigma_certificate(r, prm.sigma, prm.delta);
    Outcome o;
    o.result = Json{{"set_size", r.size()}, {"certificate", io::to_json(rc)}};
    o.table = {{"sigma", "delta", "fourier_sup", "threshold", "passed"},
               {row(rc.sigma, rc.delta, rc.fourier_sup, rc.threshold, rc.passed)}};
    return o;
  };
  *self = c;
}

void add_tail_bound(CLI::App& app, Params& prm, std::map<std::string, Command>& cmds) {
  Command c;
  c.app = app.add_subcommand("tail-bound", "exponential-moment tail bound against simulation");
  add_space(c.app, prm, true);
  c.app->add_option("--q", prm.q, "inclusion probability");
  c.app->add_option("--lambda", prm.lambda, "tail threshold");
  c.app->add_option("--xi", prm.xi, "nonzero frequency (flat index)");
  c.app->add_option("--t", prm.t, "evaluate the bound at this t in (0, 1] (0 = optimal t)");
  c.app->add_option("--trials", prm.trials, "Bernoulli sets sampled");
  c.seed = add_seed(c.app, prm, true);
  c.run = [&prm] {
    const Space s(prm.p, prm.n);
    const double n = s.size();
    Json fixed = nullptr;
    if (prm.t != 0.0) fixed = io::num(chernoff_bound(TailBoundInputs{prm.q, n, prm.lambda, prm.t}));
    const EmpiricalTailReport e = empirical_tail(s, prm.q, prm.lambda, Point{prm.xi}, prm.trials,
                                                 CounterRng::derive(prm.seed, 1), prm.threads);
    Json opt = nullptr;
    if (prm.q > 0.0) opt = io::to_json(optimized_tail(prm.q * n, n));
    Outcome o;
    o.result = Json{{"bound_at_t", fixed}, {"empirical", io::to_json(e)}, {"optimized", opt}};
    o.table = {{"q", "lambda", "trials", "frequency", "standard_error", "t_star", "bound", "within_bound"},
               {row(e.q, e.lambda, e.trials, e.frequency, e.standard_error, e.t_star, e.bound, e.within_bound)}};
    return o;
  };
  cmds["tail-bound"] = c;
}

void add_klr11(CLI::App& app, Params& prm, std::map<std::string, Command>& cmds) {
  Command c;
  c.app = app.add_subcommand("klr11", "no-edge frequency of random (t1, t2)-subgraphs under an adversary");
  c.app->add_option("--graph", prm.graph, "complete, empty or petal")
      ->check(CLI::IsMember({"complete", "empty", "petal"}));
  c.app->add_option("--u", prm.u, "side size for complete and empty graphs");
  add_space(c.app, prm, false);
  c.app->add_option("--density", prm.density, "density of the random generator for petal graphs");
  c.app->add_option("--h-dim", prm.h_dim, "petal graphs: H spanned by the first h-dim unit vectors");
  c.app->add_option("--t1", prm.t1, "vertices drawn from U1");
  c.app->add_option("--t2", prm.t2, "vertices drawn from U2");
  c.app->add_option("--adversary", prm.adversary, "trivial, greedy or greedy-high")
      ->check(CLI::IsMember({"trivial", "greedy", "greedy-high"}));
  c.app->add_option("--trials", prm.trials, "Monte Carlo trials");
  c.seed = add_seed(c.app, prm, true);
  c.run = [&prm] {
    std::optional<BipartiteAdjacency> g;
    if (prm.graph == "complete") {
      g = BipartiteAdjacency::complete(prm.u);
    } else if (prm.graph == "empty") {
      g = BipartiteAdjacency::empty(prm.u);
    } else {
      require_input(prm.p != 0 && prm.n != 0, "petal graphs need --p and --n");
      const Space s(prm.p, prm.n);
      require_input(prm.h_dim >= 1 && prm.h_dim <= s.n(), "--h-dim must lie in [1, n]");
      require_input(prm.density > 0.0 && prm.density <= 1.0, "--density must lie in (0, 1]");
      const auto size = static_cast<std::uint64_t>(std::llround(prm.density * s.size()));
      const DenseSubset a = sample_exact(s, size, CounterRng::derive(prm.seed, 0));
      std::vector<Point> units;
      for (int i = 0; i < prm.h_dim; ++i) units.push_back(Point{s.weight(i)});
      g = BipartiteAdjacency::from_petal(petal_graph(a, Subspace::span(s, units), Point{0}, Point{0}));
    }
    const Klr11Report r = mc_klr11(*g, prm.t1, prm.t2, adversary_by_name(prm.adversary), prm.trials,
                                   CounterRng::derive(prm.seed, 1), prm.threads);
    Outcome o;
    o.result = io::to_json(r);
    o.table = {{"u", "t1", "t2", "adversary", "density", "trials", "no_edge", "frequency"},
               {row(r.u, r.t1, r.t2, r.adversary, r.density, r.trials, r.no_edge, r.frequency)}};
    return o;
  };
  cmds["klr11"] = c;
}

void add_tower(CLI::App& app, Params& prm, std::map<std::string, Command>& cmds) {
  Command c;
  c.app = app.add_subcommand("tower", "tower function W(t) = (2p)^W(t-1)");
  c.app->add_option("--p", prm.p, "odd prime in [3, 13]")->required();
  c.app->add_option("--t", prm.level, "level, at least 1")->required();
  c.run = [&prm] {
    (void)Space(prm.p, 1);
    const TowerValue w = tower(prm.level, prm.p);
    Outcome o;
    o.result = io::to_json(w);
    o.table = {{"t", "value"}, {row(w.t, w.overflow() ? std::string("overflow") : std::to_string(*w.value))}};
    return o;
  };
  cmds["tower"] = c;
}

void add_density_failure(CLI::App& app, Params& prm, std::map<std::string, Command>& cmds) {
  Command c;
  c.app = app.add_subcommand("density-failure", "how often random r-sets fail to be (alpha, 3AP)-dense");
  add_space(c.app, prm, true);
  auto* r = c.app->add_option("--r", prm.r, "size of the random set");
  auto* cc = c.app->add_option("--C", prm.c, "size C sqrt(N), rounded up");
  r->excludes(cc);
  c.app->add_option("--alpha", prm.alpha, "relative subset size");
  c.app->add_option("--outer", prm.outer, "random sets");
  c.app->add_option("--inner", prm.inner, "subsets tested per set");
  c.seed = add_seed(c.app, prm, true);
  c.run = [&prm] {
    const Space s(prm.p, prm.n);
    std::uint64_t size = prm.r;
    if (prm.c > 0.0) size = static_cast<std::uint64_t>(std::ceil(prm.c * std::sqrt(static_cast<double>(s.size()))));
    require_input(size >= 1, "give a positive --r or --C");
    const DensityFailureReport rep =
        mc_density_failure(s, size, prm.alpha, prm.outer, prm.inner, prm.seed, prm.threads);
    Outcome o;
    o.result = io::to_json(rep);
    o.table.header = {"outer", "inner_failure_frequency"};
    for (std::size_t i = 0; i < rep.inner_frequencies.size(); ++i)
      o.table.rows.push_back(row(i, rep.inner_frequencies[i]));
    return o;
  };
  cmds["density-failure"] = c;
}

// ---- driver

Json echo_config(const CLI::App* sub) {
  Json cfg = Json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty()) continue;
    const std::string& name = names.front();
    if (name == "help" || name == "out" || name == "timing" || name == "threads") continue;
    if (opt->count() == 0) {
      cfg[name] = opt->get_default_str();
      continue;
    }
    std::string joined;
    for (const auto& v : opt->results()) joined += (joined.empty() ? "" : ",") + v;
    cfg[name] = joined;
  }
  return cfg;
}

std::string render_rows(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

struct Parsed {
  std::unique_ptr<CLI::App> app;
  std::unique_ptr<Params> prm;
  std::map<std::string, Command> cmds;
};

std::unique_ptr<Parsed> build() {
  auto parsed = std::make_unique<Parsed>();
  parsed->app = std::make_unique<CLI::App>("Regularity, Fourier and progression experiments over F_p^n", "fpreg");
  parsed->prm = std::make_unique<Params>();
  CLI::App& app = *parsed->app;
  Params& prm = *parsed->prm;
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  auto& cmds = parsed->cmds;
  add_fourier_check(app, prm, cmds);
  add_regularize(app, prm, cmds);
  add_regularize_multi(app, prm, cmds);
  add_roth_count(app, prm, cmds);
  add_capset(app, prm, cmds);
  add_density_test(app, prm, cmds);
  add_flower_find(app, prm, cmds);
  add_flower_validate(app, prm, cmds);
  add_sigma_cert(app, prm, cmds);
  add_tail_bound(app, prm, cmds);
  add_klr11(app, prm, cmds);
  add_tower(app, prm, cmds);
  add_density_failure(app, prm, cmds);
  auto* batch = app.add_subcommand("batch", "run the argument lines of a manifest in order");
  batch->add_option("--manifest", prm.manifest, "one invocation per line; # starts a comment")->required();
  for (auto& [name, cmd] : cmds) {
    cmd.app->add_option("--out", prm.out, "write the report here instead of stdout");
    cmd.app->add_option("--format", prm.format, "structured or rows")
        ->check(CLI::IsMember({"structured", "rows"}));
    cmd.app->add_option("--threads", prm.threads, "worker threads for inner loops")
        ->check(CLI::Range(1u, 256u));
    cmd.app->add_flag("--timing", prm.timing, "include wall time in the report");
  }
  for (auto* sub : app.get_subcommands({}))
    for (auto* opt : sub->get_options()) opt->capture_default_str();
  return parsed;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> toks;
  std::stringstream ss(line);
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

int parse(Parsed& p, const std::vector<std::string>& args) {
  std::vector<std::string> rev(args.rbegin(), args.rend());
  p.app->parse(rev);
  return 0;
}

int run_batch(const std::string& manifest, std::ostream& out, std::ostream& err) {
  std::ifstream in(manifest);
  if (!in) {
    err << "error: cannot open " << manifest << "\n";
    return kExitInput;
  }
  std::vector<std::pair<int, std::vector<std::string>>> lines;
  std::string text;
  for (int no = 1; std::getline(in, text); ++no) {
    const auto hash = text.find('#');
    if (hash != std::string::npos) text.resize(hash);
    auto toks = split_line(text);
    if (!toks.empty()) lines.emplace_back(no, std::move(toks));
  }
  // Every line must parse before anything runs.
  bool bad = false;
  for (const auto& [no, toks] : lines) {
    auto p = build();
    try {
      parse(*p, toks);
      if (toks.front() == "batch") throw CLI::ValidationError("batch manifests cannot nest");
    } catch (const CLI::ParseError& e) {
      err << manifest << ":" << no << ": " << e.what() << "\n";
      bad = true;
    }
  }
  if (bad) return kExitInput;
  for (const auto& [no, toks] : lines) {
    std::ostringstream diag;
    const int code = run(toks, out, diag);
    if (code != kExitOk) {
      std::string msg = diag.str();
      while (!msg.empty() && msg.back() == '\n') msg.pop_back();
      err << manifest << ":" << no << ": " << msg << "\n";
      return code;
    }
    err << diag.str();
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto parsed = build();
  try {
    parse(*parsed, args);
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::Success&) {
    const CLI::App* shown = parsed->app.get();
    for (const auto* sub : parsed->app->get_subcommands())
      if (sub->parsed()) shown = sub;
    out << shown->help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  const Params& prm = *parsed->prm;
  if (parsed->app->got_subcommand("batch")) return run_batch(prm.manifest, out, err);

  for (auto& [name, cmd] : parsed->cmds) {
    if (!cmd.app->parsed()) continue;
    try {
      const auto start = std::chrono::steady_clock::now();
      Outcome o = cmd.run();
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::string text;
      if (prm.format == "rows") {
        text = render_rows(o.table);
      } else {
        Json report{{"command", name}, {"version", kVersion}, {"config", echo_config(cmd.app)},
                    {"result", std::move(o.result)}};
        if (prm.timing) report["wall_time_s"] = io::num(wall);
        text = io::dump(report);
      }
      if (prm.out.empty())
        out << text;
      else
        io::write_text_file(prm.out, text);
      if (prm.timing) err << name << ": " << io::format12(wall) << " s\n";
      return kExitOk;
    } catch (const InputError& e) {
      err << "error: " << e.what() << "\n";
      return kExitInput;
    } catch (const nlohmann::json::exception& e) {
      err << "error: malformed JSON input: " << e.what() << "\n";
      return kExitInput;
    } catch (const ContractError& e) {
      err << "contract violation: " << e.what() << "\n";
      return kExitContract;
    }
  }
  err << "error: no subcommand given\n";
  return kExitInput;
}

}  // namespace fpreg::cli
