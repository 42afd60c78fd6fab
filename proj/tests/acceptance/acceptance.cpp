// Acceptance run: one PASS/FAIL line per criterion with its measured runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fltc/fltc.h"
#include "fltc/levy_process.hpp"
#include "fltc/measure_algebra.hpp"
#include "fltc/neumann_spectra.hpp"
#include "fltc/special_functions.hpp"
#include "fltc/sturm_liouville.hpp"
#include "oracles/bessel_oracles.hpp"
#include "oracles/sl_oracles.hpp"

using namespace fltc;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1-D Neumann kernel q_t on [0, beta] from its cosine series; rectangles multiply these.
double q_line(double beta, double t, double x, double y, double xi) {
  double s = 1.0 / beta;
  for (int n = 1; n < 400; ++n) {
    const double k = n * M_PI / beta;
    const double w = 2.0 / beta * std::exp(-k * k * t);
    if (w < 1e-30) break;
    s += w * std::cos(k * x) * std::cos(k * y) * std::cos(k * xi);
  }
  return s;
}

// ---------------------------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  const double beta = 1.0;
  const int n = 21;
  auto pr = sl::SLProblem::cosine(beta);
  std::vector<double> grid;
  for (int i = 0; i < n; ++i) grid.push_back(beta * i / (n - 1));
  const auto schedule = sl::default_schedule(pr, grid);
  auto s = sl::neumann_eigenvalues(pr, sl::required_count(pr, schedule.back()));
  std::mt19937_64 rng(20261019);
  std::uniform_int_distribution<int> pick(0, n - 1);
  double worst_tv = 0.0, worst_res = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const int xi = pick(rng), yi = pick(rng);
    const double x = grid[xi], y = grid[yi];
    auto r = sl::product_measure(pr, s, x, y, grid, schedule, 10);
    // two-point law of the reflected cosine product formula on the grid nodes
    std::vector<double> target(n, 0.0);
    target[std::abs(xi - yi)] += 0.5;
    target[(n - 1) - std::abs((n - 1) - xi - yi)] += 0.5;
    double tv = 0.0;
    for (int i = 0; i < n; ++i) tv += std::abs(r.weights[i] - target[i]);
    worst_tv = std::max(worst_tv, tv);
    worst_res = std::max(worst_res, r.residual);
    o.require(!r.positivity_failure, "positivity at (" + fmt("%g", x) + "," + fmt("%g", y) + ")");
  }
  o.require(worst_tv < 1e-3, "TV " + fmt("%.3g", worst_tv));
  o.require(worst_res < 1e-6, "residual " + fmt("%.3g", worst_res));
  o.note("25 pairs, max TV " + fmt("%.2e", worst_tv) + ", max residual " + fmt("%.2e", worst_res) + ", " +
         std::to_string(s.size()) + " eigenvalues, t " + fmt("%.2e", schedule.back()));
  return o;
}

// ---------------------------------------------------------------------------------------------

Outcome criterion2() {
  Outcome o;
  const std::vector<double> betas{1.0, 2.0};
  const int n = 21;
  auto table = rectangle_table(betas, n);
  auto d = DomainSpec::rectangle(betas);
  auto w = rectangle_quadrature(betas, n);
  auto fam = rectangle_family(d, *table.grid(), 25);
  auto spec = NeumannSpectrum::for_time(d, 0.1, 1e-9, 2);
  SemigroupFn gamma = [&](double t) { return heat_row(spec, table.grid(), w, t, table.identity()); };
  TransitionFn tr = [&](double t, std::size_t x) { return heat_row(spec, table.grid(), w, t, x); };
  AxiomOptions opt;
  opt.triples = 50;
  opt.quadrature_weights = w;
  auto r = check_fltc_axioms(table, fam, gamma, {0.1, 0.2}, tr, opt);
  const std::vector<std::pair<const char*, double>> devs = {
      {"commutativity", r.commutativity}, {"associativity", r.associativity}, {"identity", r.identity},
      {"probability", r.probability},     {"trivialization", r.trivialization}, {"semigroup", r.semigroup},
      {"transition", r.transition}};
  double worst = 0.0;
  for (const auto& [name, v] : devs) {
    o.require(v < 1e-6, std::string(name) + " " + fmt("%.3g", v));
    worst = std::max(worst, v);
  }
  o.require(r.injectivity_rank >= r.injectivity_required, "injectivity rank " + std::to_string(r.injectivity_rank));
  o.require(r.passed, "axiom report");
  // the heat-row transition check is restated against the image-sum kernel
  double oracle_gap = 0.0;
  for (std::size_t x : {std::size_t{0}, std::size_t{5 * 21 + 7}, std::size_t{440}}) {
    auto row = heat_row(spec, table.grid(), w, 0.1, x);
    const auto& px = (*table.grid())[x];
    for (std::size_t k = 0; k < table.size(); ++k) {
      const auto& pk = (*table.grid())[k];
      double p = oracle::cosine_heat_images(1.0, 0.1, px[0], pk[0]) * oracle::cosine_heat_images(2.0, 0.1, px[1], pk[1]);
      oracle_gap = std::max(oracle_gap, std::abs(row[k] - p * w[k]));
    }
  }
  o.require(oracle_gap < 1e-9, "heat rows vs image sums " + fmt("%.3g", oracle_gap));
  o.note("max deviation " + fmt("%.2e", worst) + ", rank " + std::to_string(r.injectivity_rank) + "/" +
         std::to_string(r.injectivity_required) + ", heat rows vs images " + fmt("%.1e", oracle_gap));
  return o;
}

// ---------------------------------------------------------------------------------------------

Outcome criterion3() {
  Outcome o;
  for (const auto& betas : {std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}}) {
    auto d = DomainSpec::rectangle(betas);
    auto grid = Grid::natural(d, 21);
    for (double t : {0.05, 0.2}) {
      auto s = NeumannSpectrum::for_time(d, t, 1e-9, 3);
      auto r = positivity_scan(s, t, grid);
      const std::string tag = std::to_string(betas.size()) + "-D t=" + fmt("%g", t);
      o.require(r.min_value >= -1e-8, tag + " min " + fmt("%.3g", r.min_value));
      o.require(r.tail_bound < 1e-9, tag + " tail " + fmt("%.3g", r.tail_bound));
      double ref = 1.0;
      for (std::size_t k = 0; k < betas.size(); ++k)
        ref *= q_line(betas[k], t, grid.points[r.argmin[0]][k], grid.points[r.argmin[1]][k],
                      grid.points[r.argmin[2]][k]);
      o.require(std::abs(ref - r.min_value) < 1e-9, tag + " oracle mismatch " + fmt("%.3g", ref - r.min_value));
      o.note(tag + " min " + fmt("%.3e", r.min_value) + " tail " + fmt("%.1e", r.tail_bound));
    }
  }
  return o;
}

// ---------------------------------------------------------------------------------------------

Outcome criterion4() {
  Outcome o;
  const double tol = 0.02;
  for (auto d : {DomainSpec::disk(1.0), DomainSpec::annulus(0.3, 1.0)}) {
    auto r = common_maximizer_check(d, 30, tol);
    o.require(!r.exists, d.kind() + " reports a common maximizer");
    o.require(r.disjoint_pair.has_value(), d.kind() + " has no disjoint maximizer pair");
    std::string note = d.kind() + ": empty";
    if (r.disjoint_pair)
      note += ", disjoint " + index_string(r.eigenpairs[(*r.disjoint_pair)[0]]) + " vs " +
              index_string(r.eigenpairs[(*r.disjoint_pair)[1]]);
    if (d.kind() == "disk") {
      // radial law r = (j'_{m,1} / j'_{m,k}) R with zeros from the independent fine scan
      const double cell = r.grid_cell;
      int checked = 0;
      double worst = 0.0;
      for (const auto& p : r.pairs) {
        const auto& e = r.eigenpairs[p.position];
        const int m = e.index[0], k = e.index[1];
        if (m < 1 || p.maximizer_count == 0) continue;
        auto z = oracle::jprime_fine_scan(m, 0.99 * m, 60.0, 1e-4, k);
        if (static_cast<int>(z.size()) < k) continue;
        const double predicted = z[0] / z[k - 1];
        const double off = std::max(0.0, std::max(p.min_radius - predicted, predicted - p.max_radius));
        worst = std::max(worst, off / cell);
        ++checked;
      }
      o.require(checked > 0, "no disk pair checked against the radial law");
      o.require(worst <= 2.0, "disk maximizer radius off the radial law by " + fmt("%.2f", worst) + " cells");
      note += ", radial law " + std::to_string(checked) + " pairs within " + fmt("%.2f", worst) + " cells";
    }
    o.note(note);
  }
  auto rect = common_maximizer_check(DomainSpec::rectangle({1.0, 2.0}), 30, tol);
  bool corner = false;
  for (const auto& p : rect.candidates) corner = corner || (std::abs(p[0]) < 1e-12 && std::abs(p[1]) < 1e-12);
  o.require(rect.exists && corner, "rectangle does not return the corner (0, 0)");
  o.note("rectangle: common maximizer (0,0)");
  return o;
}

// ---------------------------------------------------------------------------------------------

Outcome criterion5() {
  Outcome o;
  double worst_res = 0.0, worst_gap = 0.0;
  for (int m = 0; m <= 5; ++m) {
    auto t = special::jprime_zeros(m, 20);
    auto scan = oracle::jprime_fine_scan(m, m == 0 ? 0.5 : 0.99 * m, t.zeros.back() + 1.0, 1e-4, 20);
    o.require(scan.size() == 20, "J'_" + std::to_string(m) + " scan found " + std::to_string(scan.size()));
    for (std::size_t k = 0; k < t.zeros.size(); ++k) {
      worst_res = std::max(worst_res, std::abs(special::bessel_j_prime(m, t.zeros[k])));
      if (k < scan.size()) worst_gap = std::max(worst_gap, std::abs(scan[k] - t.zeros[k]));
    }
  }
  for (int m = 0; m <= 3; ++m) {
    auto t = special::annulus_cross_zeros(m, 0.3, 10);
    auto scan = oracle::cross_fine_scan(m, 0.3, 0.5, t.zeros.back() + 1.0, 1e-4, 10);
    o.require(scan.size() == 10, "cross m=" + std::to_string(m) + " scan found " + std::to_string(scan.size()));
    for (std::size_t k = 0; k < t.zeros.size(); ++k) {
      worst_res = std::max(worst_res, std::abs(special::annulus_cross(m, 0.3, t.zeros[k])));
      if (k < scan.size()) worst_gap = std::max(worst_gap, std::abs(scan[k] - t.zeros[k]));
    }
  }
  o.require(worst_res < 1e-10, "residual " + fmt("%.3g", worst_res));
  o.require(worst_gap < 1e-6, "fine-scan gap " + fmt("%.3g", worst_gap));
  o.note("max residual " + fmt("%.2e", worst_res) + ", max gap to step-1e-4 scan " + fmt("%.2e", worst_gap));
  return o;
}

// ---------------------------------------------------------------------------------------------

Outcome criterion6() {
  Outcome o;
  auto d = DomainSpec::rectangle({1.0, 2.0});
  auto pairs = eigenpairs(d, 12);
  auto poly = eigen_combination(d, pairs, {{1, 0.7}, {4, -1.3}, {9, 0.25}});
  auto exact = gradient_expansion_check(d, poly, {10, 12}, 51);
  for (const auto& row : exact.rows) {
    o.require(row.max_value_error < 1e-10, "polynomial value error " + fmt("%.3g", row.max_value_error));
    o.require(row.max_gradient_error < 1e-10, "polynomial gradient error " + fmt("%.3g", row.max_gradient_error));
  }
  auto bump = smooth_bump({0.5, 1.0}, 0.35);
  auto r = gradient_expansion_check(d, bump, {50, 100, 200, 400}, 101);
  o.require(r.value_monotone, "bump value errors not monotone");
  o.require(r.gradient_monotone, "bump gradient errors not monotone");
  auto gap = [&](const Point& g) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) s = std::max(s, std::abs(g[k] - r.probe_exact_gradient[k]));
    return s;
  };
  double norm = 0.0;
  for (double v : r.probe_exact_gradient) norm = std::max(norm, std::abs(v));
  const double first = gap(r.rows.front().probe_gradient), last = gap(r.rows.back().probe_gradient);
  o.require(norm > 1e-3, "probe gradient vanishes");
  o.require(last < first && last < 0.1 * norm, "probe gradient does not converge (" + fmt("%.3g", first) + " -> " +
                                                   fmt("%.3g", last) + ")");
  std::string errs;
  for (const auto& row : r.rows) errs += " " + fmt("%.2e", row.max_gradient_error);
  o.note("polynomial errors < 1e-10; bump gradient errors" + errs + "; probe |grad| " + fmt("%.3f", norm) +
         ", probe gap " + fmt("%.2e", first) + " -> " + fmt("%.2e", last));
  return o;
}

// ---------------------------------------------------------------------------------------------

Outcome criterion7() {
  Outcome o;
  const std::vector<double> betas{1.0, 2.0};
  const int n = 21;
  auto table = std::make_shared<ConvolutionTable>(rectangle_table(betas, n));
  auto d = DomainSpec::rectangle(betas);
  auto fam = rectangle_family(d, *table->grid(), 25);
  auto w = rectangle_quadrature(betas, n);
  auto spectrum = std::make_shared<NeumannSpectrum>(NeumannSpectrum::for_time(d, 0.01, 1e-9, 2));
  auto heat = SemigroupSpec::heat(spectrum, table->grid(), w, table->identity());
  const std::size_t x0 = 5 * 21 + 7;

  // marginal at t = 0.5 against image-sum kernel weights
  auto counts = simulate_marginal(*table, heat, 0.5, 5, x0, 7, 100000);
  std::vector<double> probs(table->size());
  const auto& px = (*table->grid())[x0];
  double total = 0.0;
  for (std::size_t k = 0; k < table->size(); ++k) {
    const auto& pk = (*table->grid())[k];
    probs[k] = oracle::cosine_heat_images(1.0, 0.5, px[0], pk[0]) * oracle::cosine_heat_images(2.0, 0.5, px[1], pk[1]) * w[k];
    total += probs[k];
  }
  for (double& p : probs) p /= total;
  auto chi = chi_square_gof(counts, probs);
  o.require(chi.p_value > 0.01, "chi-square p " + fmt("%.3g", chi.p_value));

  int mart_pass = 0;
  for (std::size_t j = 1; j <= 5; ++j) {
    auto m = martingale_check(*table, heat, fam, j, x0, 0.3, 20000, 3, 4);
    o.require(m.pass, "martingale j=" + std::to_string(j));
    mart_pass += m.pass;
  }
  double worst_sigma = 0.0;
  for (std::size_t j = 1; j <= 5; ++j)
    worst_sigma = std::max(worst_sigma, compensated_martingale_check(*table, heat, fam, j, x0, 0.01, 10, 20000, 5).worst_sigma);

  std::mt19937_64 rng(99);
  auto jumps = [&]() {
    auto m = DiscreteMeasure::zero(table->grid());
    for (int k = 0; k < 6; ++k) {
      std::size_t i = 1 + static_cast<std::size_t>(uniform01(rng) * (table->size() - 1));
      m.weights()[i] += uniform01(rng);
    }
    return m;
  };
  auto n1 = jumps(), n2 = jumps();
  const double ptv = tv_distance(convolve(*table, poisson(*table, n1).measure, poisson(*table, n2).measure),
                                 poisson(*table, n1 + n2).measure);
  o.require(ptv < 1e-9, "Poisson identity TV " + fmt("%.3g", ptv));
  auto lk = levy_khintchine_check(*table, fam, n1 + n2);
  o.require(lk.max_error < 1e-9, "Levy-Khintchine error " + fmt("%.3g", lk.max_error));
  o.note("chi-square p " + fmt("%.3f", chi.p_value) + " (" + std::to_string(chi.bins) + " bins), martingale " +
         std::to_string(mart_pass) + "/5, compensated worst " + fmt("%.2f", worst_sigma) + " sigma, Poisson TV " +
         fmt("%.1e", ptv) + ", LK " + fmt("%.1e", lk.max_error));
  return o;
}

// ---------------------------------------------------------------------------------------------

// Annulus contour export through the shared library: 12 files, k = 1 classes on the outer
// circle and the higher radial families away from it.
Outcome figure1() {
  Outcome o;
  char* result = nullptr;
  const char* cfg = R"({"domain": "annulus", "r0": 0.3, "R": 1.0, "count": 12, "grid": 101})";
  if (fltc_run("eigen", cfg, &result) != FLTC_OK) {
    o.require(false, std::string("eigen run: ") + fltc_last_error());
    return o;
  }
  auto doc = nlohmann::json::parse(result);
  fltc_string_free(result);
  int contour_files = 0;
  for (const auto& f : doc["files"]) {
    const std::string name = f["name"];
    if (name.rfind("contour_", 0) != 0) continue;
    ++contour_files;
    std::istringstream in(f["content"].get<std::string>());
    std::string header;
    std::getline(in, header);
    o.require(header == "x,y,value", name + " header");
  }
  o.require(contour_files == 12, std::to_string(contour_files) + " contour files");
  int outer = 0, inner = 0;
  for (const auto& c : doc["report"]["results"]["contours"]) {
    const auto idx = c["index"].get<std::vector<int>>();
    const std::string loc = c["maximizer_location"];
    if (idx[1] == 0) continue;  // constant
    if (idx[0] >= 1 && idx[1] == 1) {
      o.require(loc == "outer", c["label"].get<std::string>() + " peaks at " + loc);
      ++outer;
    } else {
      o.require(loc == "inner" || loc == "interior", c["label"].get<std::string>() + " peaks at " + loc);
      ++inner;
    }
  }
  o.note(std::to_string(contour_files) + " contour CSVs, " + std::to_string(outer) + " outer-circle and " +
         std::to_string(inner) + " inner/interior maximizer annotations");
  return o;
}

}  // namespace

int main() {
  struct Item {
    const char* id;
    const char* name;
    double budget;
    std::function<Outcome()> run;
  };
  const std::vector<Item> items = {
      {"1", "cosine product-measure oracle", 10.0, criterion1},
      {"2", "convolution axiom suite", 60.0, criterion2},
      {"3", "kernel positivity", 30.0, criterion3},
      {"4", "common-maximizer falsification", 60.0, criterion4},
      {"5", "Bessel zero tables", 20.0, criterion5},
      {"6", "gradient expansion", 120.0, criterion6},
      {"7", "Levy-process suite", 120.0, criterion7},
      {"F1", "annulus contour data", 30.0, figure1},
  };
  int failed = 0;
  for (const auto& it : items) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > it.budget) {
      o.pass = false;
      o.detail += "; runtime over the " + fmt("%g", it.budget) + " s budget";
    }
    failed += !o.pass;
    std::printf("[%s] criterion %s (%s): %.2f s; %s\n", o.pass ? "PASS" : "FAIL", it.id, it.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, items.size());
  return failed ? 1 : 0;
}
