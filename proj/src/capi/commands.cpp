#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "fltc/error.hpp"
#include "fltc/levy_process.hpp"
#include "fltc/measure_algebra.hpp"
#include "fltc/neumann_spectra.hpp"
#include "fltc/special_functions.hpp"
#include "fltc/sturm_liouville.hpp"

namespace fltc::capi {
namespace {

using json = nlohmann::json;

std::string g17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T opt(const json& c, const char* key, T fallback) {
  if (!c.contains(key) || c[key].is_null()) return fallback;
  try {
    return c[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

void positive(double v, const char* key) {
  if (!(v > 0.0)) throw ConfigError(std::string("config key '") + key + "' must be positive");
}

void at_least(long v, long lo, const char* key) {
  if (v < lo) throw ConfigError(std::string("config key '") + key + "' must be at least " + std::to_string(lo));
}

DomainSpec parse_domain(const json& c) {
  const std::string kind = opt<std::string>(c, "domain", "rectangle");
  if (kind == "rectangle") return DomainSpec::rectangle(opt<std::vector<double>>(c, "beta", {1.0, 1.0}));
  if (kind == "disk") return DomainSpec::disk(opt<double>(c, "R", 1.0));
  if (kind == "sector") return DomainSpec::sector(opt<int>(c, "q", 2), opt<double>(c, "R", 1.0));
  if (kind == "annulus") return DomainSpec::annulus(opt<double>(c, "r0", 0.3), opt<double>(c, "R", 1.0));
  throw ConfigError("unknown domain '" + kind + "'");
}

std::vector<double> rectangle_betas(const DomainSpec& d, const char* command) {
  const auto* r = std::get_if<Rectangle>(&d.shape());
  if (!r) throw ConfigError(std::string(command) + " supports rectangle domains only");
  return r->beta;
}

std::string numbered(const std::string& prefix, std::size_t value, int width, const std::string& ext) {
  std::string digits = std::to_string(value);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits + ext;
}

json point_json(const Point& p) { return json(p); }

json pair_json(const EigenPair& e, std::size_t position) {
  return {{"position", position}, {"index", e.index}, {"label", index_string(e)}, {"lambda", e.lambda}};
}

struct Output {
  json report;
  std::vector<std::pair<std::string, std::string>> files;
};

// --- eigen ---------------------------------------------------------------------------------

std::string location_of(const DomainSpec& d, const Point& p, double cell) {
  if (d.is_rectangle()) {
    const auto& beta = std::get<Rectangle>(d.shape()).beta;
    int on_faces = 0;
    for (std::size_t k = 0; k < p.size(); ++k)
      if (p[k] <= cell || p[k] >= beta[k] - cell) ++on_faces;
    if (on_faces == static_cast<int>(p.size())) return "corner";
    return on_faces > 0 ? "boundary" : "interior";
  }
  const double r = std::hypot(p[0], p[1]);
  if (r >= d.outer_radius() - cell) return "outer";
  if (d.inner_radius() > 0.0 && r <= d.inner_radius() + cell) return "inner";
  return "interior";
}

Output cmd_eigen(const json& c) {
  const DomainSpec d = parse_domain(c);
  const int count = opt<int>(c, "count", 12);
  const int n = opt<int>(c, "grid", 41);
  const double tol = opt<double>(c, "tol", 0.02);
  at_least(count, 1, "count");
  at_least(n, 2, "grid");
  positive(tol, "tol");
  const auto pairs = eigenpairs(d, count);
  const auto mult = multiplicities(pairs);

  Output out;
  std::ostringstream ev;
  ev << "index,lambda,multiplicity\n";
  for (std::size_t j = 0; j < pairs.size(); ++j) ev << j + 1 << ',' << g17(pairs[j].lambda) << ',' << mult[j] << '\n';
  out.files.emplace_back("eigenvalues.csv", ev.str());

  // contour box: the rectangle itself (first two axes) or the square around the polar domain
  double x0, x1, y0, y1;
  const int dim = d.dimension();
  if (d.is_rectangle()) {
    const auto& beta = std::get<Rectangle>(d.shape()).beta;
    x0 = 0.0;
    x1 = beta[0];
    y0 = 0.0;
    y1 = dim >= 2 ? beta[1] : 0.0;
  } else {
    x0 = y0 = -d.outer_radius();
    x1 = y1 = d.outer_radius();
  }
  const int ny = dim >= 2 ? n : 1;
  const Grid mgrid = Grid::natural(d, n);
  double cell = 0.0;
  for (double s : mgrid.spacing) cell = std::max(cell, s);
  if (mgrid.polar) cell = mgrid.spacing[0];

  json contours = json::array();
  int width = 1;
  for (std::size_t v = pairs.size(); v >= 10; v /= 10) ++width;
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const auto& e = pairs[j];
    std::ostringstream cs;
    cs << "x,y,value\n";
    for (int iy = 0; iy < ny; ++iy) {
      const double y = ny == 1 ? 0.0 : y0 + (y1 - y0) * iy / (ny - 1);
      for (int ix = 0; ix < n; ++ix) {
        const double x = x0 + (x1 - x0) * ix / (n - 1);
        Point p(dim, 0.0);
        p[0] = x;
        if (dim >= 2) p[1] = y;
        const double val = d.contains(p) ? eval(e, d, p) : std::nan("");
        cs << g17(x) << ',' << g17(y) << ',' << g17(val) << '\n';
      }
    }
    const std::string name = numbered("contour_", j + 1, width, ".csv");
    out.files.emplace_back(name, cs.str());

    auto ms = locate_maximizers(e, d, mgrid, tol);
    json pts = json::array(), where = json::array();
    std::map<std::string, int> kinds;
    for (const auto& p : ms.refined) {
      pts.push_back(point_json(p));
      const std::string loc = location_of(d, p, cell);
      where.push_back(loc);
      ++kinds[loc];
    }
    std::string summary = kinds.size() == 1 ? kinds.begin()->first : "mixed";
    if (e.is_constant()) summary = "everywhere";
    json entry = pair_json(e, j + 1);
    entry["file"] = name;
    entry["domain"] = d.kind();
    entry["multiplicity"] = mult[j];
    entry["normalization"] = to_string(e.normalization);
    entry["max_abs"] = ms.max_abs;
    entry["maximizers"] = e.is_constant() ? json::array() : pts;
    entry["maximizer_locations"] = e.is_constant() ? json::array() : where;
    entry["maximizer_location"] = summary;
    contours.push_back(entry);
  }
  out.report["results"] = {{"count", pairs.size()}, {"contours", contours}};
  out.report["diagnostics"] = {{"grid", n}, {"maximizer_tol", tol}, {"maximizer_cell", cell}};
  return out;
}

// --- kernel-scan ---------------------------------------------------------------------------

Output cmd_kernel_scan(const json& c) {
  const DomainSpec d = parse_domain(c);
  const auto times = opt<std::vector<double>>(c, "times", {0.05, 0.2});
  const int n = opt<int>(c, "grid", 21);
  const double tail_tol = opt<double>(c, "tail_tol", 1e-9);
  const double floor = opt<double>(c, "floor", -1e-8);
  positive(tail_tol, "tail_tol");
  at_least(n, 2, "grid");
  if (times.empty()) throw ConfigError("config key 'times' must not be empty");
  for (double t : times) positive(t, "times");
  const Grid grid = Grid::natural(d, n);
  json scans = json::array();
  bool all_positive = true;
  for (double t : times) {
    auto s = NeumannSpectrum::for_time(d, t, tail_tol, 3);
    auto r = positivity_scan(s, t, grid);
    const bool ok = r.min_value >= floor && r.tail_bound < tail_tol;
    all_positive = all_positive && ok;
    scans.push_back({{"t", t},
                     {"min_value", r.min_value},
                     {"argmin", {point_json(grid.points[r.argmin[0]]), point_json(grid.points[r.argmin[1]]),
                                 point_json(grid.points[r.argmin[2]])}},
                     {"tail_bound", r.tail_bound},
                     {"pairs_used", r.pairs_used},
                     {"triples", r.triples},
                     {"positive", ok}});
  }
  Output out;
  out.report["results"] = {{"scans", scans}, {"positive", all_positive}};
  out.report["diagnostics"] = {{"grid_points", grid.size()}, {"floor", floor}, {"tail_tol", tail_tol}};
  return out;
}

// --- maximizers ----------------------------------------------------------------------------

json optional_pair(const std::optional<std::array<std::size_t, 2>>& p, const std::vector<EigenPair>& pairs) {
  if (!p) return nullptr;
  return json::array({pair_json(pairs[(*p)[0]], (*p)[0] + 1), pair_json(pairs[(*p)[1]], (*p)[1] + 1)});
}

json optional_witness(const std::optional<std::size_t>& w, const std::vector<EigenPair>& pairs) {
  if (!w) return nullptr;
  return pair_json(pairs[*w], *w + 1);
}

Output cmd_maximizers(const json& c) {
  const DomainSpec d = parse_domain(c);
  const int count = opt<int>(c, "count", 30);
  const double tol = opt<double>(c, "tol", 0.02);
  const int n = opt<int>(c, "grid", 41);
  at_least(count, 1, "count");
  at_least(n, 2, "grid");
  positive(tol, "tol");
  auto r = common_maximizer_check(d, count, tol, n);
  json bases = json::array();
  for (const auto& b : r.bases) {
    bases.push_back({{"basis", b.basis},
                     {"rotation", b.rotation},
                     {"exists", b.exists},
                     {"candidate_count", b.candidates.size()},
                     {"witness", optional_witness(b.witness, r.eigenpairs)},
                     {"disjoint_pair", optional_pair(b.disjoint_pair, r.eigenpairs)}});
  }
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    json e = pair_json(r.eigenpairs[p.position], p.position + 1);
    e["maximizer_count"] = p.maximizer_count;
    if (d.is_polar()) {
      e["min_radius"] = p.min_radius;
      e["max_radius"] = p.max_radius;
    }
    e["predicted_radius"] = p.predicted_radius ? json(*p.predicted_radius) : json(nullptr);
    pairs.push_back(e);
  }
  json candidates = json::array();
  for (const auto& p : r.candidates) candidates.push_back(point_json(p));
  json eig = nullptr;
  if (r.eigenspace) eig = {{"exists", r.eigenspace->exists}, {"witness", optional_witness(r.eigenspace->witness, r.eigenpairs)}};
  Output out;
  out.report["results"] = {{"exists", r.exists},
                           {"candidates", candidates},
                           {"witness", optional_witness(r.witness, r.eigenpairs)},
                           {"disjoint_pair", optional_pair(r.disjoint_pair, r.eigenpairs)},
                           {"eigenspace", eig},
                           {"bases", bases},
                           {"pairs", pairs}};
  out.report["diagnostics"] = {{"grid_cell", r.grid_cell}, {"grid", n}, {"tol", tol}};
  return out;
}

// --- convolve ------------------------------------------------------------------------------

std::size_t nearest_node(const std::vector<double>& betas, int n, const std::vector<double>& coords) {
  if (coords.size() != betas.size()) throw ConfigError("point has the wrong number of coordinates");
  std::size_t idx = 0;
  for (std::size_t k = 0; k < betas.size(); ++k) {
    if (coords[k] < 0.0 || coords[k] > betas[k]) throw ConfigError("point lies outside the rectangle");
    idx = idx * n + static_cast<std::size_t>(std::lround(coords[k] * (n - 1) / betas[k]));
  }
  return idx;
}

DiscreteMeasure parse_measure(const json& spec, const GridPoints& grid, const std::vector<double>& betas, int n,
                              const char* key) {
  auto m = DiscreteMeasure::zero(grid);
  auto add_point = [&](const json& p, double w) {
    m.weights()[nearest_node(betas, n, p.get<std::vector<double>>())] += w;
  };
  try {
    if (spec.is_array()) {
      add_point(spec, 1.0);
    } else if (spec.is_number()) {
      add_point(json::array({spec}), 1.0);
    } else if (spec.contains("atoms")) {
      for (const auto& a : spec["atoms"]) {
        const auto idx = a.at(0).get<std::size_t>();
        if (idx >= grid->size()) throw ConfigError(std::string(key) + ": atom index outside the grid");
        m.weights()[idx] += a.at(1).get<double>();
      }
    } else if (spec.contains("points")) {
      for (const auto& a : spec["points"]) add_point(a.at(0), a.at(1).get<double>());
    } else {
      throw ConfigError(std::string(key) + ": expected coordinates, {\"atoms\"} or {\"points\"}");
    }
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' is malformed");
  }
  return m;
}

std::string measure_csv(const DiscreteMeasure& m) {
  std::ostringstream os;
  os << "index,weight\n";
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] != 0.0) os << i << ',' << g17(m[i]) << '\n';
  return os.str();
}

json support_json(const DiscreteMeasure& m) {
  json s = json::array();
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] != 0.0) s.push_back({{"index", i}, {"point", (*m.grid())[i]}, {"weight", m[i]}});
  return s;
}

Output cmd_convolve(const json& c) {
  const DomainSpec d = parse_domain(c);
  const auto betas = rectangle_betas(d, "convolve");
  const int n = opt<int>(c, "grid", 21);
  at_least(n, 2, "grid");
  if (!c.contains("mu") || !c.contains("nu")) throw ConfigError("convolve needs 'mu' and 'nu'");
  auto table = rectangle_table(betas, n);
  auto mu = parse_measure(c["mu"], table.grid(), betas, n, "mu");
  auto nu = parse_measure(c["nu"], table.grid(), betas, n, "nu");
  auto prod = convolve(table, mu, nu);
  Output out;
  out.files.emplace_back("measure.csv", measure_csv(prod));
  if (opt<bool>(c, "write_table", false)) out.files.emplace_back("table.json", table.to_json());
  out.report["results"] = {{"mass", prod.mass()},
                           {"total_variation", prod.total_variation()},
                           {"is_probability", prod.is_probability()},
                           {"support", support_json(prod)}};
  out.report["diagnostics"] = {{"grid_points", table.size()}, {"table_atoms", table.atom_count()}};
  return out;
}

// --- axioms --------------------------------------------------------------------------------

DiscreteMeasure random_jumps(const GridPoints& grid, std::uint64_t seed, int atoms, double rate) {
  std::mt19937_64 rng(seed);
  auto m = DiscreteMeasure::zero(grid);
  for (int k = 0; k < atoms; ++k) {
    std::size_t i = 1 + static_cast<std::size_t>(uniform01(rng) * (grid->size() - 1));
    m.weights()[std::min(i, grid->size() - 1)] += rate * uniform01(rng);
  }
  return m;
}

Output cmd_axioms(const json& c) {
  json cc = c;
  if (!cc.contains("beta")) cc["beta"] = {1.0, 2.0};
  const DomainSpec d = parse_domain(cc);
  const auto betas = rectangle_betas(d, "axioms");
  const int n = opt<int>(c, "grid", 21);
  const auto times = opt<std::vector<double>>(c, "times", {0.1, 0.2});
  const int family_size = opt<int>(c, "family", 25);
  AxiomOptions o;
  o.triples = opt<int>(c, "triples", 50);
  o.seed = opt<std::uint64_t>(c, "seed", 1);
  o.tol = opt<double>(c, "tol", 1e-6);
  at_least(n, 2, "grid");
  at_least(family_size, 1, "family");
  positive(o.tol, "tol");
  if (times.empty()) throw ConfigError("config key 'times' must not be empty");
  for (double t : times) positive(t, "times");

  auto table = rectangle_table(betas, n);
  auto w = rectangle_quadrature(betas, n);
  o.quadrature_weights = w;
  auto fam = rectangle_family(d, *table.grid(), family_size);
  const std::vector<int> divisors{2, 4, 8};
  double t_min = *std::min_element(times.begin(), times.end());
  t_min = std::min(t_min, 1.0 / divisors.back());
  auto s = NeumannSpectrum::for_time(d, t_min, 1e-9, 2);
  SemigroupFn gamma = [&](double t) { return heat_row(s, table.grid(), w, t, table.identity()); };
  TransitionFn tr = [&](double t, std::size_t x) { return heat_row(s, table.grid(), w, t, x); };
  auto r = check_fltc_axioms(table, fam, gamma, times, tr, o);

  json details = json::object();
  for (const auto& [k, v] : r.details) details[k] = v;
  json divisible = json::array();
  double worst_div = 0.0;
  for (int k : divisors) {
    double tv = tv_distance(gamma(1.0), nfold(table, gamma(1.0 / k), k));
    worst_div = std::max(worst_div, tv);
    divisible.push_back({{"n", k}, {"tv", tv}});
  }
  auto n1 = random_jumps(table.grid(), o.seed + 11, 6, 1.0);
  auto n2 = random_jumps(table.grid(), o.seed + 12, 6, 1.0);
  const double poisson_tv =
      tv_distance(convolve(table, poisson(table, n1).measure, poisson(table, n2).measure), poisson(table, n1 + n2).measure);
  auto lk = levy_khintchine_check(table, fam, n1);
  const double invariance = invariance_check(table, DiscreteMeasure(table.grid(), w));

  Output out;
  out.report["results"] = {{"commutativity", r.commutativity},
                           {"associativity", r.associativity},
                           {"identity", r.identity},
                           {"probability", r.probability},
                           {"trivialization", r.trivialization},
                           {"injectivity_rank", r.injectivity_rank},
                           {"injectivity_required", r.injectivity_required},
                           {"semigroup", r.semigroup},
                           {"transition", r.transition},
                           {"passed", r.passed},
                           {"infinite_divisibility", divisible},
                           {"poisson_identity_tv", poisson_tv},
                           {"levy_khintchine_error", lk.max_error},
                           {"invariance", invariance}};
  out.report["diagnostics"] = {{"details", details},
                               {"spectrum_pairs", s.size()},
                               {"grid_points", table.size()},
                               {"infinite_divisibility_max_tv", worst_div}};
  return out;
}

// --- simulate ------------------------------------------------------------------------------

Output cmd_simulate(const json& c) {
  json cc = c;
  if (!cc.contains("beta")) cc["beta"] = {1.0, 2.0};
  const DomainSpec d = parse_domain(cc);
  const auto betas = rectangle_betas(d, "simulate");
  const int n = opt<int>(c, "grid", 21);
  const double horizon = opt<double>(c, "horizon", 0.5);
  const int steps = opt<int>(c, "steps", 5);
  const auto seed = opt<std::uint64_t>(c, "seed", 7);
  const int paths = opt<int>(c, "paths", 1);
  const std::string kind = opt<std::string>(c, "semigroup", "heat");
  at_least(n, 2, "grid");
  at_least(steps, 1, "steps");
  at_least(paths, 1, "paths");
  if (horizon < 0.0) throw ConfigError("config key 'horizon' must be non-negative");

  auto table = std::make_shared<ConvolutionTable>(rectangle_table(betas, n));
  auto grid = table->grid();
  std::size_t x0 = 0;
  if (c.contains("x0")) {
    if (c["x0"].is_number_integer()) {
      x0 = c["x0"].get<std::size_t>();
      if (x0 >= table->size()) throw ConfigError("config key 'x0' lies outside the grid");
    } else {
      x0 = nearest_node(betas, n, opt<std::vector<double>>(c, "x0", {}));
    }
  }
  const json mart = opt<json>(c, "martingale", json::object());
  const json comp = opt<json>(c, "compensated", json::object());
  const auto marginal_paths = opt<std::uint64_t>(c, "marginal_paths", 0);
  const int family_size = opt<int>(c, "family", 25);
  auto fam = rectangle_family(d, *grid, family_size);

  const double step = horizon > 0.0 ? horizon / steps : 1.0;
  const double m_t = opt<double>(mart, "t", 0.3);
  const int m_steps = opt<int>(mart, "steps", 4);
  const double c_step = opt<double>(comp, "step", 0.01);
  std::shared_ptr<NeumannSpectrum> spectrum;
  SemigroupSpec spec;
  if (kind == "heat") {
    double t_min = step;
    if (!mart.empty()) t_min = std::min(t_min, m_t / m_steps);
    if (!comp.empty()) t_min = std::min(t_min, c_step);
    spectrum = std::make_shared<NeumannSpectrum>(NeumannSpectrum::for_time(d, t_min, 1e-9, 2));
    spec = SemigroupSpec::heat(spectrum, grid, rectangle_quadrature(betas, n), table->identity());
  } else if (kind == "poisson") {
    if (!c.contains("jump")) throw ConfigError("poisson semigroup needs 'jump'");
    spec = SemigroupSpec::poisson(table, parse_measure(c["jump"], grid, betas, n, "jump"));
  } else {
    throw ConfigError("unknown semigroup '" + kind + "'");
  }

  Output out;
  int width = 1;
  for (int v = paths - 1; v >= 10; v /= 10) ++width;
  json files = json::array();
  for (int p = 0; p < paths; ++p) {
    auto path = simulate_path(*table, spec, horizon, steps, x0, seed, static_cast<std::uint64_t>(p));
    std::ostringstream os;
    os << "t,index";
    for (std::size_t k = 0; k < betas.size(); ++k) os << ",x" << k + 1;
    os << '\n';
    for (std::size_t i = 0; i < path.states.size(); ++i) {
      os << g17(path.times[i]) << ',' << path.states[i];
      for (double v : (*grid)[path.states[i]]) os << ',' << g17(v);
      os << '\n';
    }
    const std::string name = paths == 1 ? "path.csv" : numbered("path_", p, width, ".csv");
    out.files.emplace_back(name, os.str());
    files.push_back(name);
  }

  json results = {{"paths", files}, {"start", {{"index", x0}, {"point", (*grid)[x0]}}}};
  if (marginal_paths > 0) {
    if (horizon <= 0.0) throw ConfigError("marginal test needs a positive horizon");
    auto counts = simulate_marginal(*table, spec, horizon, steps, x0, seed, marginal_paths);
    DiscreteMeasure target = kind == "heat" ? heat_row(*spectrum, grid, rectangle_quadrature(betas, n), horizon, x0)
                                            : convolve(*table, spec.gamma(horizon), DiscreteMeasure::delta(grid, x0));
    auto chi = chi_square_gof(counts, target.weights());
    results["marginal"] = {{"paths", marginal_paths},
                           {"statistic", chi.statistic},
                           {"dof", chi.dof},
                           {"bins", chi.bins},
                           {"p_value", chi.p_value},
                           {"pass", chi.p_value > 0.01}};
  }
  if (!mart.empty()) {
    const int j_max = opt<int>(mart, "j_max", 5);
    const auto samples = opt<std::uint64_t>(mart, "samples", 20000);
    json reps = json::array();
    for (int j = 1; j <= j_max; ++j) {
      auto m = martingale_check(*table, spec, fam, static_cast<std::size_t>(j), x0, m_t, samples, seed, m_steps);
      reps.push_back({{"j", m.j}, {"t", m.t}, {"psi", m.psi}, {"estimate", m.estimate},
                      {"stderr", m.stderr_}, {"target", m.target}, {"pass", m.pass}});
    }
    results["martingale"] = reps;
  }
  if (!comp.empty()) {
    const int j_max = opt<int>(comp, "j_max", 5);
    const int c_steps = opt<int>(comp, "steps", 10);
    const auto samples = opt<std::uint64_t>(comp, "samples", 20000);
    json reps = json::array();
    for (int j = 1; j <= j_max; ++j) {
      auto r = compensated_martingale_check(*table, spec, fam, static_cast<std::size_t>(j), x0, c_step, c_steps,
                                            samples, seed);
      reps.push_back({{"j", r.j}, {"psi", r.psi}, {"worst_sigma", r.worst_sigma}, {"pass", r.pass}});
    }
    results["compensated"] = reps;
  }
  out.report["results"] = results;
  out.report["diagnostics"] = {{"grid_points", table->size()},
                               {"step", horizon > 0.0 ? step : 0.0},
                               {"spectrum_pairs", spectrum ? spectrum->size() : 0}};
  return out;
}

// --- expand-gradient -----------------------------------------------------------------------

Output cmd_expand_gradient(const json& c) {
  const DomainSpec d = parse_domain(c);
  const auto betas = rectangle_betas(d, "expand-gradient");
  const auto counts = opt<std::vector<int>>(c, "counts", {50, 100, 200, 400});
  const int sample = opt<int>(c, "sample", 101);
  const std::string fn = opt<std::string>(c, "function", "bump");
  if (counts.empty()) throw ConfigError("config key 'counts' must not be empty");
  for (int k : counts) at_least(k, 1, "counts");
  at_least(sample, 2, "sample");
  TestFunction h;
  if (fn == "bump") {
    Point centre(betas.size());
    double rmin = betas[0];
    for (std::size_t k = 0; k < betas.size(); ++k) {
      centre[k] = 0.5 * betas[k];
      rmin = std::min(rmin, betas[k]);
    }
    centre = opt<std::vector<double>>(c, "centre", centre);
    h = smooth_bump(centre, opt<double>(c, "radius", 0.3 * rmin), opt<double>(c, "amplitude", 1.0));
  } else if (fn == "combination") {
    std::vector<std::pair<std::size_t, double>> terms;
    try {
      for (const auto& t : c.at("terms")) terms.emplace_back(t.at(0).get<std::size_t>(), t.at(1).get<double>());
    } catch (const json::exception&) {
      throw ConfigError("combination needs 'terms' as [[position, coefficient], ...]");
    }
    std::size_t top = 0;
    for (const auto& [j, a] : terms) top = std::max(top, j + 1);
    h = eigen_combination(d, eigenpairs(d, static_cast<int>(top)), terms);
  } else {
    throw ConfigError("unknown function '" + fn + "'");
  }
  auto r = gradient_expansion_check(d, h, counts, sample);
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"count", row.count},
                    {"pairs_used", row.pairs_used},
                    {"max_value_error", row.max_value_error},
                    {"max_gradient_error", row.max_gradient_error},
                    {"probe_gradient", row.probe_gradient}});
  Output out;
  out.report["results"] = {{"function", h.name},
                           {"rows", rows},
                           {"probe", r.probe},
                           {"probe_exact_gradient", r.probe_exact_gradient},
                           {"value_monotone", r.value_monotone},
                           {"gradient_monotone", r.gradient_monotone}};
  out.report["diagnostics"] = {{"quadrature_nodes", r.quadrature_nodes}, {"sample", sample}};
  return out;
}

// --- zeros ---------------------------------------------------------------------------------

Output cmd_zeros(const json& c) {
  const std::string kind = opt<std::string>(c, "kind", "jprime");
  const int count = opt<int>(c, "count", 20);
  const double ratio = opt<double>(c, "ratio", 0.3);
  std::vector<int> orders;
  if (c.contains("orders")) {
    orders = opt<std::vector<int>>(c, "orders", {});
  } else if (c.contains("m")) {
    orders = {opt<int>(c, "m", 0)};
  } else {
    for (int m = 0; m <= opt<int>(c, "m_max", 5); ++m) orders.push_back(m);
  }
  if (kind != "jprime" && kind != "annulus_cross") throw ConfigError("unknown zero kind '" + kind + "'");
  at_least(count, 1, "count");
  for (int m : orders) at_least(m, 0, "orders");

  std::ostringstream csv;
  csv << "kind,order,k,zero,residual\n";
  json tables = json::array();
  double worst = 0.0;
  for (int m : orders) {
    auto t = kind == "jprime" ? special::jprime_zeros(m, count) : special::annulus_cross_zeros(m, ratio, count);
    double tw = 0.0;
    json res = json::array();
    for (std::size_t k = 0; k < t.zeros.size(); ++k) {
      const double z = t.zeros[k];
      const double r = kind == "jprime" ? special::bessel_j_prime(m, z) : special::annulus_cross(m, ratio, z);
      tw = std::max(tw, std::abs(r));
      res.push_back(r);
      csv << kind << ',' << m << ',' << k + 1 << ',' << g17(z) << ',' << g17(r) << '\n';
    }
    worst = std::max(worst, tw);
    tables.push_back({{"kind", kind},
                      {"order", m},
                      {"ratio", kind == "jprime" ? json(nullptr) : json(ratio)},
                      {"zeros", t.zeros},
                      {"residuals", res},
                      {"max_residual", tw}});
  }
  Output out;
  out.files.emplace_back("zeros.csv", csv.str());
  out.report["results"] = {{"tables", tables}, {"max_residual", worst}};
  out.report["diagnostics"] = json::object();
  return out;
}

// --- product-measure -----------------------------------------------------------------------

Output cmd_product_measure(const json& c) {
  sl::SLProblem pr = c.contains("problem") ? sl::SLProblem::from_json(c["problem"].dump())
                                           : sl::SLProblem::cosine(opt<double>(c, "beta_sl", 1.0));
  const int n = opt<int>(c, "grid", 21);
  const int j_check = opt<int>(c, "j_check", 10);
  at_least(n, 2, "grid");
  at_least(j_check, 1, "j_check");
  std::vector<std::array<double, 2>> pts;
  if (c.contains("pairs")) {
    pts = opt<std::vector<std::array<double, 2>>>(c, "pairs", {});
  } else {
    pts.push_back({opt<double>(c, "x", 0.3), opt<double>(c, "y", 0.4)});
  }
  std::vector<double> grid;
  for (int i = 0; i < n; ++i) grid.push_back(pr.a + (pr.b - pr.a) * i / (n - 1));
  const auto schedule = sl::default_schedule(pr, grid);
  auto s = sl::neumann_eigenvalues(pr, std::max(j_check + 1, sl::required_count(pr, schedule.back())));

  Output out;
  json measures = json::array();
  bool any_positivity_failure = false;
  int width = 1;
  for (std::size_t v = pts.size(); v >= 10; v /= 10) ++width;
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const auto [x, y] = pts[p];
    auto r = sl::product_measure(pr, s, x, y, grid, schedule, j_check);
    std::ostringstream os;
    os << "xi,weight\n";
    for (std::size_t i = 0; i < grid.size(); ++i) os << g17(grid[i]) << ',' << g17(r.weights[i]) << '\n';
    const std::string name = pts.size() == 1 ? "nu.csv" : numbered("nu_", p, width, ".csv");
    out.files.emplace_back(name, os.str());
    any_positivity_failure = any_positivity_failure || r.positivity_failure;
    measures.push_back({{"x", x},
                        {"y", y},
                        {"file", name},
                        {"t_used", r.t_used},
                        {"residual", r.residual},
                        {"raw_mass", r.raw_mass},
                        {"clipped_mass", r.clipped_mass},
                        {"min_weight", r.min_weight},
                        {"positivity_failure", r.positivity_failure},
                        {"spectrum_limited", r.spectrum_limited},
                        {"tail_bound", r.tail_bound}});
  }
  out.report["results"] = {{"measures", measures}, {"positivity_failure", any_positivity_failure}};
  out.report["diagnostics"] = {{"problem", pr.description},
                               {"eigenvalues", s.size()},
                               {"schedule_min_t", schedule.back()}};
  return out;
}

}  // namespace

std::string run_command(const std::string& command, const std::string& config_json) {
  json cfg;
  try {
    cfg = config_json.empty() ? json::object() : json::parse(config_json);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  static const std::map<std::string, std::function<Output(const json&)>> table = {
      {"eigen", cmd_eigen},       {"kernel-scan", cmd_kernel_scan},
      {"maximizers", cmd_maximizers}, {"convolve", cmd_convolve},
      {"axioms", cmd_axioms},     {"simulate", cmd_simulate},
      {"expand-gradient", cmd_expand_gradient}, {"zeros", cmd_zeros},
      {"product-measure", cmd_product_measure},
  };
  auto it = table.find(command);
  if (it == table.end()) throw ConfigError("unknown command '" + command + "'");
  Output out = it->second(cfg);
  json report = {{"command", command}, {"config", cfg}};
  report["results"] = out.report.value("results", json::object());
  report["diagnostics"] = out.report.value("diagnostics", json::object());
  json files = json::array();
  for (auto& [name, content] : out.files) files.push_back({{"name", name}, {"content", content}});
  return json{{"report", report}, {"files", files}}.dump();
}

}  // namespace fltc::capi
