#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "fltc/error.hpp"
#include "fltc/neumann_spectra.hpp"
#include "fltc/special_functions.hpp"
#include "oracles/bessel_oracles.hpp"
#include "oracles/quadrature.hpp"

using namespace fltc;

namespace {

std::vector<DomainSpec> model_domains() {
  return {DomainSpec::rectangle({1.0, 2.0}), DomainSpec::disk(1.0), DomainSpec::sector(3, 1.5),
          DomainSpec::annulus(0.3, 1.0)};
}

Point polar_point(double r, double th) { return {r * std::cos(th), r * std::sin(th)}; }

// random point strictly inside the domain, at least `margin` from the boundary
Point interior_point(const DomainSpec& d, std::mt19937_64& rng, double margin) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (auto* rect = std::get_if<Rectangle>(&d.shape())) {
    Point p;
    for (double b : rect->beta) p.push_back(margin + (b - 2 * margin) * u(rng));
    return p;
  }
  double r = d.inner_radius() + margin + (d.outer_radius() - d.inner_radius() - 2 * margin) * u(rng);
  double span = d.angle_span();
  double th = std::holds_alternative<Sector>(d.shape()) ? margin + (span - 2 * margin) * u(rng) : span * u(rng);
  return polar_point(r, th);
}

// boundary point and outward unit normal
std::pair<Point, Point> boundary_point(const DomainSpec& d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> side(0, 3);
  if (auto* rect = std::get_if<Rectangle>(&d.shape())) {
    const int s = side(rng);
    const std::size_t k = s % 2;
    Point p{rect->beta[0] * u(rng), rect->beta[1] * u(rng)};
    Point n{0.0, 0.0};
    p[k] = s < 2 ? 0.0 : rect->beta[k];
    n[k] = s < 2 ? -1.0 : 1.0;
    return {p, n};
  }
  const double R = d.outer_radius(), r_in = d.inner_radius(), span = d.angle_span();
  const int s = side(rng);
  if (std::holds_alternative<Sector>(d.shape()) && s >= 2) {
    double r = R * (0.05 + 0.9 * u(rng));
    double th = s == 2 ? 0.0 : span;
    Point n = s == 2 ? Point{0.0, -1.0} : Point{-std::sin(span), std::cos(span)};
    return {polar_point(r, th), n};
  }
  double th = std::holds_alternative<Sector>(d.shape()) ? span * (0.05 + 0.9 * u(rng)) : span * u(rng);
  if (r_in > 0.0 && s % 2 == 0) return {polar_point(r_in, th), {-std::cos(th), -std::sin(th)}};
  return {polar_point(R, th), {std::cos(th), std::sin(th)}};
}

// tensor product rule in the natural chart: (point, weight)
std::vector<std::pair<Point, double>> domain_rule(const DomainSpec& d) {
  std::vector<std::pair<Point, double>> out;
  if (auto* rect = std::get_if<Rectangle>(&d.shape())) {
    auto a = oracle::composite_rule(0.0, rect->beta[0], 12), b = oracle::composite_rule(0.0, rect->beta[1], 24);
    for (std::size_t i = 0; i < a.x.size(); ++i)
      for (std::size_t j = 0; j < b.x.size(); ++j) out.push_back({{a.x[i], b.x[j]}, a.w[i] * b.w[j]});
    return out;
  }
  auto rr = oracle::composite_rule(d.inner_radius(), d.outer_radius(), 10);
  std::vector<double> th, tw;
  if (std::holds_alternative<Sector>(d.shape())) {
    auto t = oracle::composite_rule(0.0, d.angle_span(), 4);
    th = t.x;
    tw = t.w;
  } else {
    const int n = 160;
    for (int k = 0; k < n; ++k) {
      th.push_back(2 * M_PI * k / n);
      tw.push_back(2 * M_PI / n);
    }
  }
  for (std::size_t i = 0; i < rr.x.size(); ++i)
    for (std::size_t k = 0; k < th.size(); ++k) out.push_back({polar_point(rr.x[i], th[k]), rr.w[i] * tw[k] * rr.x[i]});
  return out;
}

double laplacian_fd(const EigenPair& e, const DomainSpec& d, const Point& p, double h) {
  double c = eval(e, d, p), s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    Point a = p, b = p;
    a[k] += h;
    b[k] -= h;
    s += eval(e, d, a) - 2 * c + eval(e, d, b);
  }
  return s / (h * h);
}

}  // namespace

TEST_CASE("rectangle and disk eigenvalue examples") {
  auto sq = eigenpairs(DomainSpec::rectangle({1.0, 1.0}), 4);
  REQUIRE(sq.size() == 4);
  const double pi2 = M_PI * M_PI;
  CHECK(sq[0].lambda == 0.0);
  CHECK(sq[1].lambda == doctest::Approx(pi2).epsilon(1e-14));
  CHECK(sq[2].lambda == doctest::Approx(pi2).epsilon(1e-14));
  CHECK(sq[3].lambda == doctest::Approx(2 * pi2).epsilon(1e-14));

  auto disk = eigenpairs(DomainSpec::disk(1.0), 2);
  REQUIRE(disk.size() == 3);  // the tie class of the second eigenvalue is completed
  auto jp = oracle::jprime_fine_scan(1, 1e-3, 3.0, 1e-3, 1);
  REQUIRE(!jp.empty());
  CHECK(disk[0].lambda == 0.0);
  CHECK(std::abs(disk[1].lambda - jp[0] * jp[0]) < 1e-5);
  CHECK(disk[1].lambda == disk[2].lambda);
  CHECK(disk[1].lambda == doctest::Approx(3.390).epsilon(1e-3));
  CHECK(multiplicities(disk)[1] == 2);
}

TEST_CASE("the smallest eigenvalue is zero with a constant eigenfunction") {
  std::mt19937_64 rng(1);
  for (const auto& d : model_domains()) {
    auto e = eigenpairs(d, 5);
    CHECK(e[0].lambda == 0.0);
    CHECK(e[0].is_constant());
    double c = eval(e[0], d, interior_point(d, rng, 0.05));
    for (int i = 0; i < 5; ++i) CHECK(eval(e[0], d, interior_point(d, rng, 0.05)) == doctest::Approx(c).epsilon(1e-15));
    for (std::size_t j = 1; j < e.size(); ++j) CHECK(e[j].lambda > 0.0);
  }
}

TEST_CASE("closed-form evaluation examples") {
  auto d = DomainSpec::rectangle({1.0, 2.0});
  EigenPair e10, e11;
  for (const auto& e : eigenpairs(d, 20)) {
    if (e.index == std::vector<int>{1, 0}) e10 = e;
    if (e.index == std::vector<int>{1, 1}) e11 = e;
  }
  CHECK(eval(e10, d, {0.0, 0.0}) == 1.0);
  CHECK(std::abs(eval(e11, d, {0.5, 1.0})) < 1e-15);

  auto disk = DomainSpec::disk(1.0);
  for (const auto& e : eigenpairs(disk, 10)) {
    if (e.index != std::vector<int>{0, 1, 0}) continue;
    double z = oracle::jprime_fine_scan(0, 1e-3, 4.5, 1e-4, 1)[0];
    CHECK(std::abs(eval(e, disk, {1.0, 0.0}) - e.scale * oracle::j_series(0, z)) < 1e-6);
    CHECK(std::abs(eval(e, disk, {1.0, 0.0}) - e.scale * special::bessel_j(0, e.root)) < 1e-14);
  }
  CHECK_THROWS_AS(eval(e10, d, {1.5, 0.0}), Error);
}

TEST_CASE("eigenfunctions satisfy the Helmholtz equation and the Neumann condition") {
  std::mt19937_64 rng(2);
  for (const auto& d : model_domains()) {
    auto pairs = eigenpairs(d, 25);
    for (std::size_t j = 1; j < pairs.size(); j += 3) {
      const auto& e = pairs[j];
      const double scale = std::max(e.sup_value, 1e-300);
      for (int i = 0; i < 20; ++i) {
        Point p = interior_point(d, rng, 0.02);
        double h = 1e-3;
        double res = laplacian_fd(e, d, p, h) + e.lambda * eval(e, d, p);
        CHECK_MESSAGE(std::abs(res) < 1e-4 * e.lambda * scale, d.kind() << " " << index_string(e));
      }
      for (int i = 0; i < 20; ++i) {
        auto [p, n] = boundary_point(d, rng);
        // one-sided second-order difference along the inward normal
        const double h = 1e-5;
        Point p1 = p, p2 = p;
        for (std::size_t k = 0; k < p.size(); ++k) {
          p1[k] -= h * n[k];
          p2[k] -= 2 * h * n[k];
        }
        double dn = (3 * eval_unchecked(e, d, p) - 4 * eval_unchecked(e, d, p1) + eval_unchecked(e, d, p2)) / (2 * h);
        CHECK_MESSAGE(std::abs(dn) < 1e-6 * std::max(1.0, e.lambda) * scale,
                      d.kind() << " " << index_string(e) << " dn=" << dn);
      }
    }
  }
}

TEST_CASE("gradients agree with central differences") {
  std::mt19937_64 rng(3);
  for (const auto& d : model_domains()) {
    auto pairs = eigenpairs(d, 20);
    for (std::size_t j = 0; j < pairs.size(); j += 2) {
      for (int i = 0; i < 5; ++i) {
        Point p = interior_point(d, rng, 0.02);
        Point g = eval_gradient(pairs[j], d, p);
        for (std::size_t k = 0; k < p.size(); ++k) {
          const double h = 1e-4;
          Point a = p, b = p;
          a[k] += h;
          b[k] -= h;
          double fd = (eval(pairs[j], d, a) - eval(pairs[j], d, b)) / (2 * h);
          CHECK(std::abs(g[k] - fd) < 1e-6 * std::max(1.0, pairs[j].lambda));
        }
      }
    }
  }
}

TEST_CASE("orthonormality by tensor quadrature on every model domain") {
  for (const auto& d : model_domains()) {
    auto pairs = eigenpairs(d, 30);
    auto rule = domain_rule(d);
    std::vector<std::vector<double>> vals(pairs.size());
    for (std::size_t j = 0; j < pairs.size(); ++j)
      for (const auto& [p, w] : rule) vals[j].push_back(eval_unchecked(pairs[j], d, p));
    double worst = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double ip = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) ip += rule[q].second * vals[i][q] * vals[j][q];
        double target = i == j ? pairs[i].l2_norm_sq : 0.0;
        worst = std::max(worst, std::abs(ip - target) / std::sqrt(pairs[i].l2_norm_sq * pairs[j].l2_norm_sq));
      }
    }
    CHECK_MESSAGE(worst < 1e-6, d.kind() << " worst " << worst);
  }
}

TEST_CASE("rectangle enumeration matches the lattice count") {
  auto d = DomainSpec::rectangle({1.0, 1.7});
  for (double lam : {10.0, 100.0, 523.3, 2000.0}) {
    std::size_t brute = 0;
    for (int a = 0; a < 100; ++a)
      for (int b = 0; b < 100; ++b)
        if (M_PI * M_PI * (a * a + b * b / (1.7 * 1.7)) <= lam) ++brute;
    CHECK(eigenpairs_below(d, lam).size() == brute);
  }
  auto e = eigenpairs(d, 300);
  std::set<std::vector<int>> seen;
  for (const auto& p : e) seen.insert(p.index);
  CHECK(seen.size() == e.size());
}

TEST_CASE("polar enumeration is exhaustive against a direct zero scan") {
  auto d = DomainSpec::annulus(0.3, 1.0);
  const double lam = 300.0, xmax = std::sqrt(lam);
  // the radial eigenvalue exceeds m^2 / R^2, so scans for order m start just below m
  std::size_t brute = 1;  // constant
  for (int m = 0; m <= xmax; ++m) {
    for (double z : oracle::cross_fine_scan(m, 0.3, std::max(1e-3, 0.99 * m), xmax, 1e-3, 1000)) brute += (z <= xmax) ? (m == 0 ? 1 : 2) : 0;
  }
  CHECK(eigenpairs_below(d, lam).size() == brute);
  auto disk = DomainSpec::disk(2.0);
  std::size_t brute_disk = 1;
  const double xd = 2.0 * std::sqrt(0.5 * lam);
  for (int m = 0; m <= xd; ++m)
    for (double z : oracle::jprime_fine_scan(m, std::max(1e-3, 0.99 * m), xd, 2e-3, 1000)) brute_disk += (z > 1e-9 && z <= xd) ? (m == 0 ? 1 : 2) : 0;
  CHECK(eigenpairs_below(disk, 0.5 * lam).size() == brute_disk);
}

TEST_CASE("heat kernel: symmetry, mass and long-time limit") {
  auto d = DomainSpec::rectangle({1.0, 1.0});
  auto s = NeumannSpectrum::for_time(d, 0.1, 1e-9, 2);
  auto rule = domain_rule(DomainSpec::rectangle({1.0, 1.0}));
  std::mt19937_64 rng(4);
  for (int i = 0; i < 5; ++i) {
    Point x = interior_point(d, rng, 0.0);
    double mass = 0.0;
    for (const auto& [y, w] : rule) mass += w * heat_kernel(s, 0.1, x, y);
    CHECK(std::abs(mass - 1.0) < 1e-6);
    Point y = interior_point(d, rng, 0.0);
    CHECK(heat_kernel(s, 0.1, x, y) == heat_kernel(s, 0.1, y, x));
  }
  for (const auto& dom : model_domains()) {
    auto few = NeumannSpectrum::compute(dom, 10);
    std::mt19937_64 r2(5);
    double v = heat_kernel(few, 50.0, interior_point(dom, r2, 0.01), interior_point(dom, r2, 0.01));
    CHECK(v == doctest::Approx(1.0 / dom.volume()).epsilon(1e-9));
  }
  auto disk = DomainSpec::disk(1.0);
  auto sd = NeumannSpectrum::for_time(disk, 0.05, 1e-9, 2);
  auto drule = domain_rule(disk);
  double mass = 0.0;
  for (const auto& [y, w] : drule) mass += w * heat_kernel(sd, 0.05, {0.2, -0.4}, y);
  CHECK(std::abs(mass - 1.0) < 1e-6);
  CHECK_THROWS_AS(heat_kernel(NeumannSpectrum::compute(d, 5), 1e-3, {0.1, 0.1}, {0.2, 0.2}), Error);
}

TEST_CASE("kernel_q collapses at the rectangle corner and is permutation symmetric") {
  auto d = DomainSpec::rectangle({1.0, 2.0});
  auto s = NeumannSpectrum::for_time(d, 0.05, 1e-9, 3);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 10; ++i) {
    Point x = interior_point(d, rng, 0.0), xi = interior_point(d, rng, 0.0), y = interior_point(d, rng, 0.0);
    CHECK(kernel_q(s, 0.05, x, {0.0, 0.0}, xi) == heat_kernel(s, 0.05, x, xi));
    double q = kernel_q(s, 0.05, x, y, xi);
    CHECK(q == kernel_q(s, 0.05, xi, y, x));
    CHECK(q == kernel_q(s, 0.05, y, xi, x));
  }
}

TEST_CASE("positivity scan examples") {
  auto line = DomainSpec::rectangle({1.0});
  auto grid = Grid::natural(line, 21);
  auto s = NeumannSpectrum::for_time(line, 0.2, 1e-9, 3);
  auto scan = positivity_scan(s, 0.2, grid);
  CHECK(scan.min_value >= -1e-8);
  CHECK(scan.triples > 0);
  for (auto i : scan.argmin) CHECK(i < grid.size());
  double at = kernel_q(s, 0.2, grid.points[scan.argmin[0]], grid.points[scan.argmin[1]], grid.points[scan.argmin[2]]);
  CHECK(std::abs(at - scan.min_value) < 1e-12);

  auto sq = DomainSpec::rectangle({1.0, 2.0});
  auto s10 = NeumannSpectrum::for_time(sq, 10.0, 1e-9, 3);
  auto big = positivity_scan(s10, 10.0, Grid::natural(sq, 7));
  CHECK(big.min_value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("maximizer examples") {
  auto rect = DomainSpec::rectangle({1.0, 2.0});
  auto g = Grid::natural(rect, 21);
  for (const auto& e : eigenpairs(rect, 12)) {
    auto ms = locate_maximizers(e, rect, g, 0.02);
    CHECK(std::find(ms.grid_indices.begin(), ms.grid_indices.end(), 0u) != ms.grid_indices.end());
    if (e.is_constant()) CHECK(ms.grid_indices.size() == g.size());
  }
  auto disk = DomainSpec::disk(1.0);
  auto gd = Grid::natural(disk, 41);
  for (const auto& e : eigenpairs(disk, 30)) {
    if (e.angular == 0) continue;
    double first = special::jprime_zeros(e.order, 1).zeros[0];
    double predicted = first / e.root;
    auto ms = locate_maximizers(e, disk, gd, 0.02);
    REQUIRE(!ms.refined.empty());
    for (const auto& p : ms.refined) CHECK(std::abs(std::hypot(p[0], p[1]) - predicted) < 1e-5);
    double lo = INFINITY, hi = 0.0;
    for (auto i : ms.grid_indices) {
      lo = std::min(lo, gd.chart[i][0]);
      hi = std::max(hi, gd.chart[i][0]);
    }
    CHECK(predicted >= lo - gd.spacing[0]);
    CHECK(predicted <= hi + gd.spacing[0]);
  }
  CHECK_THROWS_AS(locate_maximizers(eigenpairs(disk, 1)[0], disk, gd, 0.2), Error);
}

TEST_CASE("common maximizer check") {
  auto rect = common_maximizer_check(DomainSpec::rectangle({1.0, 2.0}), 50, 0.02);
  CHECK(rect.exists);
  bool has_origin = false;
  for (const auto& c : rect.candidates) has_origin |= (c[0] == 0.0 && c[1] == 0.0);
  CHECK(has_origin);

  auto trivial = common_maximizer_check(DomainSpec::disk(1.0), 1, 0.02);
  CHECK(trivial.exists);

  for (const auto& d : {DomainSpec::disk(1.0), DomainSpec::annulus(0.3, 1.0)}) {
    auto rep = common_maximizer_check(d, 30, 0.02);
    CHECK_FALSE(rep.exists);
    REQUIRE(rep.eigenspace.has_value());
    CHECK(rep.eigenspace->witness.has_value());
    for (const auto& b : rep.bases) CHECK_FALSE(b.exists);
    REQUIRE(rep.disjoint_pair.has_value());
    auto [i, j] = *rep.disjoint_pair;
    CHECK(i != j);
  }
}

TEST_CASE("gradient expansion on the rectangle") {
  auto d = DomainSpec::rectangle({1.0, 2.0});
  auto pairs = eigenpairs(d, 40);
  auto single = eigen_combination(d, pairs, {{5, 1.0}});
  auto r1 = gradient_expansion_check(d, single, {8, 16, 32}, 41);
  for (const auto& row : r1.rows) {
    CHECK(row.max_value_error < 1e-10);
    CHECK(row.max_gradient_error < 1e-10);
  }
  auto combo = eigen_combination(d, pairs, {{2, 0.3}, {7, 0.1}});
  auto r2 = gradient_expansion_check(d, combo, {16}, 21);
  CHECK(std::abs(r2.coefficients[2] - 0.3) < 1e-10);
  CHECK(std::abs(r2.coefficients[7] - 0.1) < 1e-10);

  auto bump = smooth_bump({0.37, 1.13}, 0.3);
  auto r3 = gradient_expansion_check(d, bump, {50, 100, 200, 400}, 41);
  CHECK(r3.value_monotone);
  CHECK(r3.gradient_monotone);
  double gnorm = std::hypot(r3.probe_exact_gradient[0], r3.probe_exact_gradient[1]);
  CHECK(gnorm > 0.1);
  const auto& last = r3.rows.back().probe_gradient;
  CHECK(std::hypot(last[0], last[1]) > 0.5 * gnorm);
  CHECK(r3.rows.back().max_gradient_error < r3.rows.front().max_gradient_error);
}
