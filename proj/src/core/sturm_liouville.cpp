#include "fltc/sturm_liouville.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

#include "fltc/error.hpp"
#include "json.hpp"

namespace fltc::sl {
namespace odeint = boost::numeric::odeint;

namespace {

constexpr int kSamples = 1000;

double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

// Sorted unique copy of xs with a prepended, plus the position of every x in it.
std::vector<double> observation_times(const SLProblem& pr, const std::vector<double>& xs,
                                      std::vector<std::size_t>& where) {
  for (double x : xs) {
    if (!(x >= pr.a - 1e-12 * (pr.b - pr.a) && x <= pr.b + 1e-12 * (pr.b - pr.a))) {
      fail(ErrorCode::outside_domain, "solve_w: point " + num(x) + " outside the interval");
    }
  }
  std::vector<double> t(xs);
  for (double& v : t) v = std::clamp(v, pr.a, pr.b);
  t.push_back(pr.a);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  where.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double v = std::clamp(xs[i], pr.a, pr.b);
    where[i] = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), v) - t.begin());
  }
  return t;
}

using Prufer = std::array<double, 3>;  // theta, log rho, d theta / d lambda
using Direct = std::array<double, 2>;  // w, p w'

template <class State, class Rhs>
std::vector<State> run(Rhs rhs, State y0, const std::vector<double>& times, double tol, double dt0) {
  std::vector<State> out;
  out.reserve(times.size());
  if (times.size() == 1) {
    out.push_back(y0);
    return out;
  }
  try {
    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_times(stepper, rhs, y0, times.begin(), times.end(), dt0,
                            [&out](const State& y, double) { out.push_back(y); });
  } catch (const std::exception& e) {
    fail(ErrorCode::integrator, std::string("ODE integration failed: ") + e.what());
  }
  if (out.size() != times.size()) fail(ErrorCode::integrator, "ODE integration stopped early");
  return out;
}

struct PruferRun {
  std::vector<Prufer> states;
};

std::vector<Prufer> prufer_states(const SLProblem& pr, double lambda, const std::vector<double>& times,
                                  double tol) {
  auto rhs = [&pr, lambda](const Prufer& y, Prufer& dy, double x) {
    const double p = pr.p(x), r = pr.r(x);
    const double k = std::sqrt(lambda * r / p);
    const double g = 0.25 * (pr.dr_at(x) / r + pr.dp_at(x) / p);
    const double s2 = std::sin(2.0 * y[0]), c2 = std::cos(2.0 * y[0]);
    dy[0] = k + g * s2;
    dy[1] = -g * c2;
    dy[2] = 0.5 * k / lambda + 2.0 * g * c2 * y[2];
  };
  const double s_a = std::sqrt(lambda * pr.r(pr.a) * pr.p(pr.a));
  Prufer y0{0.5 * M_PI, 0.5 * std::log(s_a), 0.0};
  const double dt0 = std::min(pr.b - pr.a, 0.5 / std::sqrt(lambda * pr.r(pr.a) / pr.p(pr.a))) * 0.1;
  return run<Prufer>(rhs, y0, times, tol, dt0);
}

WValues from_prufer(const SLProblem& pr, double lambda, const std::vector<Prufer>& st,
                    const std::vector<double>& times) {
  WValues v;
  v.w.resize(st.size());
  v.pw.resize(st.size());
  for (std::size_t i = 0; i < st.size(); ++i) {
    const double x = times[i];
    const double s = std::sqrt(lambda * pr.r(x) * pr.p(x));
    const double rho = std::exp(st[i][1]);
    v.w[i] = rho / std::sqrt(s) * std::sin(st[i][0]);
    v.pw[i] = rho * std::sqrt(s) * std::cos(st[i][0]);
  }
  return v;
}

WValues solve_sorted(const SLProblem& pr, double lambda, const std::vector<double>& times, double tol) {
  WValues v;
  if (lambda == 0.0) {
    v.w.assign(times.size(), 1.0);
    v.pw.assign(times.size(), 0.0);
    return v;
  }
  if (lambda > 0.0) return from_prufer(pr, lambda, prufer_states(pr, lambda, times, tol), times);
  auto rhs = [&pr, lambda](const Direct& y, Direct& dy, double x) {
    dy[0] = y[1] / pr.p(x);
    dy[1] = -lambda * pr.r(x) * y[0];
  };
  auto st = run<Direct>(rhs, Direct{1.0, 0.0}, times, tol, 1e-3 * (pr.b - pr.a));
  for (const auto& s : st) {
    v.w.push_back(s[0]);
    v.pw.push_back(s[1]);
  }
  return v;
}

struct AngleData {
  double theta = 0.0, dtheta = 0.0, log_rho = 0.0;
};

AngleData angle_at_b(const SLProblem& pr, double lambda, double tol) {
  if (lambda <= 0.0) return {0.5 * M_PI, 0.0, 0.0};
  auto st = prufer_states(pr, lambda, {pr.a, pr.b}, tol);
  return {st.back()[0], st.back()[2], st.back()[1]};
}

double finite_difference(const Coefficient& f, double x, double a, double b) {
  const double h = 1e-4 * (b - a);
  if (x - h >= a && x + h <= b) return (f(x + h) - f(x - h)) / (2.0 * h);
  if (x - h < a) return (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h);
  return (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h);
}

struct Bounds {
  double sup = 1.0;       // uniform bound on |w|
  double norm_low = 0.0;  // estimate of inf ||w||^2
  double lam_c = 0.0;     // lambda_j >= lam_c (j - 1)^2
};

Bounds problem_bounds(const SLProblem& pr) {
  double tv = 0.0, prev = std::log(pr.r(pr.a) * pr.p(pr.a));
  const double rp_a = pr.r(pr.a) * pr.p(pr.a);
  double worst_ratio = 1.0, pmin = pr.p(pr.a), rmax = pr.r(pr.a);
  for (int i = 1; i <= kSamples; ++i) {
    double x = pr.a + (pr.b - pr.a) * i / kSamples;
    double rp = pr.r(x) * pr.p(x);
    double l = std::log(rp);
    tv += std::abs(l - prev);
    prev = l;
    worst_ratio = std::max(worst_ratio, rp_a / rp);
    pmin = std::min(pmin, pr.p(x));
    rmax = std::max(rmax, pr.r(x));
  }
  Bounds b;
  b.sup = std::pow(worst_ratio, 0.25) * std::exp(0.25 * tv) * (1.0 + 1e-6);
  double weighted = integrate([&](double x) { return pr.r(x) * std::sqrt(rp_a / (pr.r(x) * pr.p(x))); }, pr.a, pr.b);
  b.norm_low = 0.4 * std::exp(-0.5 * tv) * weighted;
  b.lam_c = M_PI * M_PI * pmin / (rmax * (pr.b - pr.a) * (pr.b - pr.a));
  return b;
}

Coefficient parse_coefficient(const nlohmann::json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("kind")) fail(ErrorCode::invalid_argument, "coefficient " + name + " needs a kind");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    double c = j.at("value").get<double>();
    return [c](double) { return c; };
  }
  if (kind == "polynomial") {
    auto c = j.at("coefficients").get<std::vector<double>>();
    require(!c.empty(), "polynomial coefficient list is empty");
    return [c](double x) {
      double v = 0.0;
      for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
      return v;
    };
  }
  if (kind == "jacobi") {
    double al = j.at("alpha").get<double>(), be = j.at("beta").get<double>();
    double l = j.value("left", -1.0), rr = j.value("right", 1.0), s = j.value("scale", 1.0);
    return [=](double x) { return s * std::pow(x - l, al) * std::pow(rr - x, be); };
  }
  fail(ErrorCode::invalid_argument, "unknown coefficient kind '" + kind + "'");
}

Coefficient parse_derivative(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return [](double) { return 0.0; };
  if (kind == "polynomial") {
    auto c = j.at("coefficients").get<std::vector<double>>();
    return [c](double x) {
      double v = 0.0;
      for (std::size_t i = c.size(); i-- > 1;) v = v * x + static_cast<double>(i) * c[i];
      return v;
    };
  }
  double al = j.at("alpha").get<double>(), be = j.at("beta").get<double>();
  double l = j.value("left", -1.0), rr = j.value("right", 1.0), s = j.value("scale", 1.0);
  return [=](double x) {
    return s * (al * std::pow(x - l, al - 1.0) * std::pow(rr - x, be) -
                be * std::pow(x - l, al) * std::pow(rr - x, be - 1.0));
  };
}

}  // namespace

SLProblem SLProblem::make(double a, double b, Coefficient p, Coefficient r, Coefficient dp, Coefficient dr,
                          bool smooth) {
  require(std::isfinite(a) && std::isfinite(b) && a < b, "SLProblem: need a finite interval a < b");
  require(static_cast<bool>(p) && static_cast<bool>(r), "SLProblem: p and r are required");
  double pmin = INFINITY, pmax = 0.0, rmin = INFINITY, rmax = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    double x = a + (b - a) * i / kSamples;
    double pv = p(x), rv = r(x);
    if (!(std::isfinite(pv) && pv > 0.0) || !(std::isfinite(rv) && rv > 0.0)) {
      std::ostringstream os;
      os << "SLProblem: coefficients must be positive and finite, found p(" << x << ") = " << pv << ", r(" << x
         << ") = " << rv;
      fail(ErrorCode::invalid_argument, os.str());
    }
    pmin = std::min(pmin, pv);
    pmax = std::max(pmax, pv);
    rmin = std::min(rmin, rv);
    rmax = std::max(rmax, rv);
  }
  if (pmin < 1e-10 * pmax || rmin < 1e-10 * rmax) {
    fail(ErrorCode::invalid_argument, "SLProblem: coefficients degenerate near an endpoint (not regular)");
  }
  SLProblem pr;
  pr.a = a;
  pr.b = b;
  pr.p = std::move(p);
  pr.r = std::move(r);
  pr.dp = std::move(dp);
  pr.dr = std::move(dr);
  pr.smooth = smooth;
  return pr;
}

SLProblem SLProblem::cosine(double beta) {
  auto one = [](double) { return 1.0; };
  auto zero = [](double) { return 0.0; };
  SLProblem pr = make(0.0, beta, one, one, zero, zero, true);
  pr.description = "cosine";
  return pr;
}

SLProblem SLProblem::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("SLProblem JSON: ") + e.what());
  }
  try {
    auto iv = j.at("interval").get<std::vector<double>>();
    require(iv.size() == 2, "SLProblem JSON: interval needs two end points");
    nlohmann::json pj = j.value("p", nlohmann::json{{"kind", "constant"}, {"value", 1.0}});
    nlohmann::json rj = j.value("r", nlohmann::json{{"kind", "constant"}, {"value", 1.0}});
    SLProblem pr = make(iv[0], iv[1], parse_coefficient(pj, "p"), parse_coefficient(rj, "r"), parse_derivative(pj),
                        parse_derivative(rj), j.value("smooth", true));
    pr.description = j.dump();
    return pr;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("SLProblem JSON: ") + e.what());
  }
}

double SLProblem::dp_at(double x) const { return dp ? dp(x) : finite_difference(p, x, a, b); }
double SLProblem::dr_at(double x) const { return dr ? dr(x) : finite_difference(r, x, a, b); }

WValues solve_w_full(const SLProblem& pr, double lambda, const std::vector<double>& xs, double tol) {
  require(std::isfinite(lambda), "solve_w: lambda must be finite");
  require(tol > 0.0, "solve_w: tolerance must be positive");
  std::vector<std::size_t> where;
  auto times = observation_times(pr, xs, where);
  WValues sorted = solve_sorted(pr, lambda, times, tol);
  WValues out;
  for (std::size_t i : where) {
    out.w.push_back(sorted.w[i]);
    out.pw.push_back(sorted.pw[i]);
  }
  return out;
}

std::vector<double> solve_w(const SLProblem& pr, double lambda, const std::vector<double>& xs, double tol) {
  return solve_w_full(pr, lambda, xs, tol).w;
}

double prufer_angle(const SLProblem& pr, double lambda, double tol) { return angle_at_b(pr, lambda, tol).theta; }

int oscillation_count(const SLProblem& pr, double lambda, double tol) {
  return static_cast<int>(std::floor(prufer_angle(pr, lambda, tol) / M_PI));
}

SLSpectrum neumann_eigenvalues(const SLProblem& pr, int count) {
  require(count >= 1 && count <= kMaxEigenvalues,
          "neumann_eigenvalues: count must lie in [1, " + std::to_string(kMaxEigenvalues) + "]");
  const double tol = 1e-10;
  SLSpectrum s;
  s.lambda.push_back(0.0);
  s.norm_sq.push_back(integrate(pr.r, pr.a, pr.b));
  const double travel = integrate([&](double x) { return std::sqrt(pr.r(x) / pr.p(x)); }, pr.a, pr.b);

  for (int j = 2; j <= count; ++j) {
    const double target = 0.5 * M_PI + (j - 1) * M_PI;
    const double guess = std::pow((j - 1) * M_PI / travel, 2);
    double lo = s.lambda.back();
    double hi = std::max(2.0 * guess, lo * 1.5) + 1.0;
    int expand = 0;
    while (angle_at_b(pr, hi, tol).theta <= target) {
      lo = hi;
      hi *= 2.0;
      if (++expand > 60) {
        std::ostringstream os;
        os << "neumann_eigenvalues: no bracket for eigenvalue " << j << "; oscillation count at " << hi << " is "
           << oscillation_count(pr, hi) << ", expected at least " << j - 1;
        fail(ErrorCode::convergence, os.str());
      }
    }
    // Newton steps on theta(b) - target, falling back to bisection outside the bracket
    double lam = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
    bool done = false;
    for (int it = 0; it < 200 && !done; ++it) {
      AngleData ad = angle_at_b(pr, lam, tol);
      double f = ad.theta - target;
      if (f < 0.0) lo = lam;
      else hi = lam;
      double next = lam - f / ad.dtheta;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      done = std::abs(next - lam) <= 1e-13 * next || hi - lo <= 1e-12 * hi;
      lam = next;
    }
    if (!done) fail(ErrorCode::convergence, "neumann_eigenvalues: refinement of eigenvalue " + std::to_string(j) + " did not converge");
    AngleData fin = angle_at_b(pr, lam, tol);
    if (static_cast<int>(std::floor(fin.theta / M_PI)) != j - 1) {
      std::ostringstream os;
      os << "neumann_eigenvalues: eigenvalue " << j << " = " << lam << " has oscillation count "
         << std::floor(fin.theta / M_PI) << ", expected " << j - 1;
      fail(ErrorCode::convergence, os.str());
    }
    s.lambda.push_back(lam);
    s.norm_sq.push_back(std::exp(2.0 * fin.log_rho) * fin.dtheta);
  }
  for (double n : s.norm_sq) s.rho_weight.push_back(1.0 / n);
  Bounds b = problem_bounds(pr);
  s.sup_bound = b.sup;
  s.norm_lower = b.norm_low;
  for (double n : s.norm_sq) s.norm_lower = std::min(s.norm_lower, n);
  s.lambda_constant = b.lam_c;
  return s;
}

double tail_bound(const SLProblem& pr, const SLSpectrum& s, double t, int power) {
  (void)pr;
  require(t > 0.0, "tail_bound: t must be positive");
  const double mp = std::pow(s.sup_bound, power);
  const double lam_k = s.lambda.back();
  const std::size_t k = s.size();
  double sum = 0.0;
  for (std::size_t j = k + 1; j < k + 10000000; ++j) {
    double jm = static_cast<double>(j - 1);
    double lam = std::max(lam_k, s.lambda_constant * jm * jm);
    double term = std::exp(-lam * t) * mp / s.norm_lower;
    sum += term;
    if (s.lambda_constant * jm * jm > lam_k && term < 1e-30 * std::max(sum, 1e-300)) break;
    if (term == 0.0) break;
  }
  return sum;
}

namespace {

std::vector<std::vector<double>> values_at(const SLProblem& pr, const SLSpectrum& s, const std::vector<double>& xs) {
  std::vector<std::vector<double>> v;
  v.reserve(s.size());
  std::vector<std::size_t> where;
  auto times = observation_times(pr, xs, where);
  for (double lam : s.lambda) {
    auto w = solve_sorted(pr, lam, times, 1e-10).w;
    std::vector<double> row;
    for (auto i : where) row.push_back(w[i]);
    v.push_back(std::move(row));
  }
  return v;
}

void check_tail(const SLProblem& pr, const SLSpectrum& s, double t, int power, const char* what) {
  require(t > 0.0, std::string(what) + ": t must be positive");
  double tail = tail_bound(pr, s, t, power);
  if (tail > 1e-9) {
    fail(ErrorCode::tail_unreachable, std::string(what) + ": tail bound " + num(tail) + " with " +
                                          std::to_string(s.size()) + " eigenvalues at t = " + num(t));
  }
}

}  // namespace

double heat_kernel_sl(const SLProblem& pr, const SLSpectrum& s, double t, double x, double y) {
  check_tail(pr, s, t, 2, "heat_kernel_sl");
  auto v = values_at(pr, s, {x, y});
  double sum = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) sum += std::exp(-s.lambda[j] * t) * s.rho_weight[j] * (v[j][0] * v[j][1]);
  return sum;
}

double kernel_q_sl(const SLProblem& pr, const SLSpectrum& s, double t, double x, double y, double xi) {
  check_tail(pr, s, t, 3, "kernel_q_sl");
  auto v = values_at(pr, s, {x, y, xi});
  double sum = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    std::array<double, 3> f{v[j][0], v[j][1], v[j][2]};
    std::sort(f.begin(), f.end());
    sum += std::exp(-s.lambda[j] * t) * s.rho_weight[j] * (f[0] * f[1] * f[2]);
  }
  return sum;
}

double apply_operator(const SLProblem& pr, double x, double du, double d2u) {
  return -(pr.dp_at(x) * du + pr.p(x) * d2u) / pr.r(x);
}

std::vector<double> default_schedule(const SLProblem& pr, const std::vector<double>& grid) {
  double h = pr.b - pr.a;
  for (std::size_t i = 1; i < grid.size(); ++i) h = std::min(h, grid[i] - grid[i - 1]);
  double diff = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    double x = pr.a + (pr.b - pr.a) * i / kSamples;
    diff = std::max(diff, pr.p(x) / pr.r(x));
  }
  // diffusion length sqrt(2 t p / r) below h / 12
  const double t_min = h * h / (288.0 * diff);
  std::vector<double> out;
  for (int i = 0; i < 64; ++i) {
    double t = 0.1 * std::ldexp(1.0, -i);
    out.push_back(t);
    if (i >= 10 && t < t_min) break;
  }
  return out;
}

int required_count(const SLProblem& pr, double t, double tol) {
  require(t > 0.0, "required_count: t must be positive");
  Bounds b = problem_bounds(pr);
  const double travel = integrate([&](double x) { return std::sqrt(pr.r(x) / pr.p(x)); }, pr.a, pr.b);
  // lambda_j grows like ((j - 1) pi / travel)^2; keep adding until the bounded tail is small
  for (int k = 16; k <= kMaxEigenvalues; k += 8) {
    SLSpectrum probe;
    double jm = k - 1;
    probe.lambda = {std::pow(jm * M_PI / travel, 2) * 0.98};
    probe.sup_bound = b.sup;
    probe.norm_lower = b.norm_low;
    probe.lambda_constant = b.lam_c;
    // the probe holds one entry, so offset the tail index through lambda_constant only
    double sum = 0.0;
    for (int j = k + 1; j < k + 100000; ++j) {
      double lam = std::max(probe.lambda[0], b.lam_c * (j - 1.0) * (j - 1.0));
      double term = std::exp(-lam * t) * std::pow(b.sup, 3) / b.norm_low;
      sum += term;
      if (term < 1e-30 * sum) break;
    }
    if (sum < tol) return k;
  }
  return kMaxEigenvalues;
}

ProductMeasureResult product_measure(const SLProblem& pr, const SLSpectrum& s, double x, double y,
                                     const std::vector<double>& grid, std::vector<double> t_schedule, int j_check) {
  require(grid.size() >= 2, "product_measure: grid needs two points");
  for (std::size_t i = 1; i < grid.size(); ++i) require(grid[i] > grid[i - 1], "product_measure: grid must increase");
  require(grid.front() >= pr.a && grid.back() <= pr.b, "product_measure: grid outside the interval");
  for (double v : {x, y}) {
    if (v < pr.a || v > pr.b) fail(ErrorCode::outside_domain, "product_measure: point outside the interval");
  }
  if (t_schedule.empty()) t_schedule = default_schedule(pr, grid);
  for (std::size_t i = 1; i < t_schedule.size(); ++i)
    require(t_schedule[i] < t_schedule[i - 1], "product_measure: t schedule must decrease");
  require(j_check >= 1, "product_measure: j_check must be positive");

  const std::size_t G = grid.size();
  const std::size_t K = s.size();
  const std::size_t J = std::min<std::size_t>(j_check, K);
  // cell edges: a, midpoints, b
  std::vector<double> edges(G + 1);
  edges[0] = pr.a;
  edges[G] = pr.b;
  for (std::size_t i = 1; i < G; ++i) edges[i] = 0.5 * (grid[i - 1] + grid[i]);

  std::vector<double> pts = grid;
  pts.insert(pts.end(), edges.begin() + 1, edges.end() - 1);
  pts.push_back(x);
  pts.push_back(y);
  std::vector<std::size_t> where;
  auto times = observation_times(pr, pts, where);

  // mass of w_k on each cell: for k >= 2 it is -[p w_k']_{edges} / lambda_k
  std::vector<std::vector<double>> mass(K, std::vector<double>(G));
  std::vector<std::vector<double>> wnode(J, std::vector<double>(G));
  std::vector<double> wx(K), wy(K);
  for (std::size_t k = 0; k < K; ++k) {
    if (k == 0) {
      for (std::size_t i = 0; i < G; ++i) mass[0][i] = integrate(pr.r, edges[i], edges[i + 1]);
      wx[0] = wy[0] = 1.0;
      if (J > 0) std::fill(wnode[0].begin(), wnode[0].end(), 1.0);
      continue;
    }
    WValues v = solve_sorted(pr, s.lambda[k], times, 1e-10);
    std::vector<double> pw_edge(G + 1, 0.0);
    for (std::size_t i = 1; i < G; ++i) pw_edge[i] = v.pw[where[G + i - 1]];
    for (std::size_t i = 0; i < G; ++i) mass[k][i] = -(pw_edge[i + 1] - pw_edge[i]) / s.lambda[k];
    wx[k] = v.w[where[pts.size() - 2]];
    wy[k] = v.w[where[pts.size() - 1]];
    if (k < J)
      for (std::size_t i = 0; i < G; ++i) wnode[k][i] = v.w[where[i]];
  }
  double total_r = 0.0;
  for (double m : mass[0]) total_r += m;

  auto measure_at = [&](double t) {
    std::vector<double> nu(G, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      double c = std::exp(-s.lambda[k] * t) * wx[k] * wy[k] / s.norm_sq[k];
      if (c == 0.0) continue;
      for (std::size_t i = 0; i < G; ++i) nu[i] += c * mass[k][i];
    }
    return nu;
  };
  auto residual_of = [&](const std::vector<double>& nu) {
    double r = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      double lhs = 0.0;
      for (std::size_t i = 0; i < G; ++i) lhs += nu[i] * wnode[j][i];
      r = std::max(r, std::abs(lhs - wx[j] * wy[j]));
    }
    return r;
  };

  ProductMeasureResult out;
  out.grid = grid;
  std::vector<double> best;
  for (double t : t_schedule) {
    double tail = tail_bound(pr, s, t, 3) * total_r;
    if (tail > 1e-9) {
      out.spectrum_limited = true;
      break;
    }
    auto nu = measure_at(t);
    double res = residual_of(nu);
    out.t_history.push_back(t);
    out.residual_history.push_back(res);
    if (!best.empty() && res > out.residual) break;
    best = std::move(nu);
    out.residual = res;
    out.t_used = t;
    out.tail_bound = tail;
  }
  if (best.empty()) {
    fail(ErrorCode::tail_unreachable, "product_measure: spectrum too short for the first scheduled time");
  }
  out.raw_mass = 0.0;
  out.min_weight = *std::min_element(best.begin(), best.end());
  double negative = 0.0;
  for (double v : best) {
    out.raw_mass += v;
    if (v < -1e-12) negative -= v;
  }
  if (negative > 0.0) {
    if (negative < 1e-8) {
      double total = 0.0;
      for (double& v : best) {
        if (v < 0.0) v = 0.0;
        total += v;
      }
      for (double& v : best) v /= total;
      out.clipped_mass = negative;
      out.residual = residual_of(best);
    } else {
      out.positivity_failure = true;
    }
  }
  out.weights = std::move(best);
  return out;
}

}  // namespace fltc::sl
