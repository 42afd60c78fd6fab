#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fltc/error.hpp"
#include "fltc/neumann_spectra.hpp"

namespace fltc {
namespace {

// sum over n >= 0 of exp(-pi^2 n^2 t / beta^2) / ||cos||^2
double axis_trace(double beta, double t) {
  double s = 1.0 / beta;
  for (int n = 1;; ++n) {
    double a = M_PI * n / beta;
    double term = 2.0 / beta * std::exp(-a * a * t);
    s += term;
    if (term < 1e-18 * s) break;
  }
  return s;
}

}  // namespace

NeumannSpectrum::NeumannSpectrum(DomainSpec d, std::vector<EigenPair> pairs)
    : domain_(std::move(d)), pairs_(std::move(pairs)) {
  require(!pairs_.empty(), "spectrum needs at least one eigenpair");
}

NeumannSpectrum NeumannSpectrum::compute(const DomainSpec& d, int count) {
  return NeumannSpectrum(d, eigenpairs(d, count));
}

NeumannSpectrum NeumannSpectrum::for_time(const DomainSpec& d, double t, double tol, int power,
                                          int max_count) {
  require(t > 0.0, "for_time: t must be positive");
  int count = 32;
  while (true) {
    int c = std::min(count, max_count);
    NeumannSpectrum s = compute(d, c);
    double tail = s.tail_bound(t, power);
    if (tail < tol) return s;
    if (c >= max_count) {
      fail(ErrorCode::tail_unreachable,
           "tail bound " + num(tail) + " exceeds " + num(tol) + " with " +
               std::to_string(s.size()) + " eigenpairs at t = " + num(t));
    }
    count *= 2;
  }
}

double NeumannSpectrum::kernel_scale(std::size_t j) const {
  if (domain_.is_rectangle()) return 1.0;
  return 1.0 / pairs_[j].sup_value;
}

double NeumannSpectrum::tail_bound(double t, int power, std::size_t used) const {
  require(t > 0.0, "tail_bound: t must be positive");
  used = std::min(used, pairs_.size());
  if (auto* rect = std::get_if<Rectangle>(&domain_.shape())) {
    // every |phi_j| <= 1, so the dropped mass is the full trace minus the included part
    double total = 1.0;
    for (double b : rect->beta) total *= axis_trace(b, t);
    double included = 0.0;
    for (std::size_t j = 0; j < used; ++j) included += std::exp(-pairs_[j].lambda * t) / pairs_[j].l2_norm_sq;
    return std::max(0.0, total - included) + 8.0 * std::numeric_limits<double>::epsilon() * total;
  }
  auto term = [&](const EigenPair& e) {
    double m = e.sup_bound;
    double v = std::exp(-e.lambda * t) * m * m / e.l2_norm_sq;
    if (power == 3) v *= m / e.sup_value;
    return v;
  };
  double tail = 0.0;
  for (std::size_t j = used; j < pairs_.size(); ++j) tail += term(pairs_[j]);
  // Remainder above the last computed eigenvalue: twice the two-term Weyl density,
  // sup bounds growing like lambda^(1/4) from the largest bound in the upper half.
  const double top = pairs_.back().lambda;
  double mref = 0.0, ratio = 1.0;
  for (const auto& e : pairs_) {
    if (e.lambda >= 0.5 * top) {
      mref = std::max(mref, e.sup_bound);
      ratio = std::max(ratio, e.sup_bound / e.sup_value);
    }
  }
  const double vol = domain_.volume(), per = domain_.perimeter();
  const int steps = 600;
  const double smax = 60.0;
  double rem = 0.0;
  for (int i = 0; i <= steps; ++i) {
    double s = smax * i / steps;
    double lam = std::max(top, 1e-12) + s / t;
    double density = 2.0 * (vol / (4.0 * M_PI) + per / (8.0 * M_PI * std::sqrt(lam)));
    double mb = mref * std::pow(lam / std::max(top, 1e-12), 0.25);
    double f = std::exp(-lam * t) * density * mb * mb * (power == 3 ? ratio : 1.0);
    rem += (i == 0 || i == steps ? 0.5 : 1.0) * f;
  }
  rem *= smax / steps / t;
  return tail + rem;
}

double heat_kernel(const NeumannSpectrum& s, double t, const Point& x, const Point& y, double tail_tol) {
  require(t > 0.0, "heat_kernel: t must be positive");
  const auto& d = s.domain();
  for (const Point* p : {&x, &y}) {
    if (!d.contains(*p, 1e-9)) fail(ErrorCode::outside_domain, "heat_kernel: point outside domain");
  }
  double tail = s.tail_bound(t, 2);
  if (tail > tail_tol) {
    fail(ErrorCode::tail_unreachable, "heat_kernel: tail bound " + num(tail) + " with " +
                                          std::to_string(s.size()) + " eigenpairs at t = " + num(t));
  }
  double sum = 0.0;
  for (const auto& e : s.pairs()) {
    double a = eval_unchecked(e, d, x), b = eval_unchecked(e, d, y);
    sum += std::exp(-e.lambda * t) / e.l2_norm_sq * (a * b);
  }
  return sum;
}

double kernel_q(const NeumannSpectrum& s, double t, const Point& x, const Point& y, const Point& xi,
                double tail_tol) {
  require(t > 0.0, "kernel_q: t must be positive");
  const auto& d = s.domain();
  for (const Point* p : {&x, &y, &xi}) {
    if (!d.contains(*p, 1e-9)) fail(ErrorCode::outside_domain, "kernel_q: point outside domain");
  }
  double tail = s.tail_bound(t, 3);
  if (tail > tail_tol) {
    fail(ErrorCode::tail_unreachable, "kernel_q: tail bound " + num(tail) + " with " +
                                          std::to_string(s.size()) + " eigenpairs at t = " + num(t));
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const auto& e = s.pairs()[j];
    const double k = s.kernel_scale(j);
    std::array<double, 3> v{k * eval_unchecked(e, d, x), k * eval_unchecked(e, d, y), k * eval_unchecked(e, d, xi)};
    // ordering the factors makes the product invariant under argument permutations
    std::sort(v.begin(), v.end());
    sum += std::exp(-e.lambda * t) / (k * k * e.l2_norm_sq) * (v[0] * v[1] * v[2]);
  }
  return sum;
}

PositivityScan positivity_scan(const NeumannSpectrum& s, double t, const Grid& grid) {
  require(t > 0.0, "positivity_scan: t must be positive");
  const auto& d = s.domain();
  const Eigen::Index J = static_cast<Eigen::Index>(s.size());
  const Eigen::Index G = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd phi(J, G);
  Eigen::VectorXd w(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    const auto& e = s.pairs()[j];
    const double k = s.kernel_scale(j);
    for (Eigen::Index i = 0; i < G; ++i) phi(j, i) = k * eval_unchecked(e, d, grid.points[i]);
    w(j) = std::exp(-e.lambda * t) / (k * k * e.l2_norm_sq);
  }
  PositivityScan out;
  out.min_value = std::numeric_limits<double>::infinity();
  out.pairs_used = s.size();
  out.tail_bound = s.tail_bound(t, 3);
  for (Eigen::Index x = 0; x < G; ++x) {
    // q(x, y, .) for every y >= x; the kernel is symmetric in (x, y)
    const Eigen::Index ny = G - x;
    Eigen::VectorXd wx = w.cwiseProduct(phi.col(x));
    Eigen::MatrixXd a = phi.rightCols(ny).array().colwise() * wx.array();
    Eigen::MatrixXd q = phi.transpose() * a;
    Eigen::Index xi, y;
    double m = q.minCoeff(&xi, &y);
    if (m < out.min_value) {
      out.min_value = m;
      out.argmin = {static_cast<std::size_t>(x), static_cast<std::size_t>(x + y), static_cast<std::size_t>(xi)};
    }
    out.triples += static_cast<std::size_t>(ny) * static_cast<std::size_t>(G);
  }
  return out;
}

}  // namespace fltc
