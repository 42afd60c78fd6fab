#include "fltc/special_functions.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <limits>
#include "json.hpp"
#include <sstream>

#include "fltc/error.hpp"

namespace fltc::special {
namespace {

namespace bmp = boost::math::policies;
using Policy = bmp::policy<bmp::overflow_error<bmp::ignore_error>,
                           bmp::underflow_error<bmp::ignore_error>,
                           bmp::denorm_error<bmp::ignore_error>,
                           bmp::promote_double<false>>;

constexpr double kScanStep = M_PI / 8.0;
constexpr double kPi = M_PI;

void check_args(int m, double x, bool second_kind) {
  if (m < 0) fail(ErrorCode::invalid_argument, "Bessel order must be non-negative");
  if (std::isnan(x)) fail(ErrorCode::domain, "Bessel argument is NaN");
  if (x < 0.0) {
    fail(ErrorCode::domain, std::string(second_kind ? "bessel_y" : "bessel_j") +
                                ": negative argument " + num(x));
  }
}

struct Bracket {
  double lo, hi, flo, fhi;
};

template <class F, class DF>
double refine(const F& f, const DF& df, Bracket b) {
  for (int it = 0; it < 300; ++it) {
    double mid = 0.5 * (b.lo + b.hi);
    if (b.hi - b.lo <= 1e-13 * std::max(1.0, mid)) break;
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0) == (b.flo < 0)) {
      b.lo = mid;
      b.flo = fm;
    } else {
      b.hi = mid;
      b.fhi = fm;
    }
  }
  double x = 0.5 * (b.lo + b.hi);
  double fx = f(x);
  double d = df(x);
  if (d != 0.0 && std::isfinite(d)) {
    double xn = x - fx / d;
    if (xn >= b.lo && xn <= b.hi && std::abs(f(xn)) <= std::abs(fx)) x = xn;
  }
  return x;
}

std::string bracket_text(double lo, double hi) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << lo << ", " << hi << "]";
  return os.str();
}

// Scan [x0, xmax] with step pi/8, refine every sign change. Stops after
// `limit` zeros when limit > 0.
template <class F, class DF>
std::vector<double> scan_zeros(const F& f, const DF& df, double x0, double xmax, int limit,
                               double abs_residual, const char* what) {
  std::vector<double> zeros;
  double x = x0;
  double fx = f(x);
  if (!std::isfinite(fx)) fail(ErrorCode::convergence, std::string(what) + ": non-finite value at scan start");
  while (x < xmax && (limit <= 0 || static_cast<int>(zeros.size()) < limit)) {
    double xn = std::min(x + kScanStep, xmax);
    double fn = f(xn);
    if (!std::isfinite(fn)) {
      fail(ErrorCode::convergence, std::string(what) + ": non-finite value in bracket " + bracket_text(x, xn));
    }
    if (fn == 0.0) {
      zeros.push_back(xn);
      // step past the exact zero so it is not reported twice
      x = xn + 1e-9 * std::max(1.0, xn);
      fx = f(x);
      continue;
    }
    if ((fx < 0) != (fn < 0)) {
      double z = refine(f, df, {x, xn, fx, fn});
      double fz = f(z);
      double slope = std::abs(df(z)) * z;
      bool ok = std::abs(fz) < 1e-12 * std::max(1.0, slope);
      if (abs_residual > 0) ok = ok && std::abs(fz) < abs_residual;
      if (!ok) {
        fail(ErrorCode::convergence, std::string(what) + ": residual " + num(fz) +
                                         " too large after refinement in bracket " + bracket_text(x, xn));
      }
      zeros.push_back(z);
    }
    x = xn;
    fx = fn;
  }
  return zeros;
}

double jprime_start(int m) { return m == 0 ? 1e-3 : static_cast<double>(m); }

}  // namespace

double bessel_j(int m, double x) {
  check_args(m, x, false);
  if (x == 0.0) return m == 0 ? 1.0 : 0.0;
  return boost::math::cyl_bessel_j(static_cast<double>(m), x, Policy());
}

double bessel_y(int m, double x) {
  check_args(m, x, true);
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  double y = boost::math::cyl_neumann(static_cast<double>(m), x, Policy());
  if (!std::isfinite(y)) return -std::numeric_limits<double>::infinity();
  return y;
}

double bessel_j_prime(int m, double x) {
  check_args(m, x, false);
  if (m == 0) return -bessel_j(1, x);
  return 0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x));
}

double bessel_y_prime(int m, double x) {
  check_args(m, x, true);
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  if (m == 0) return -bessel_y(1, x);
  double a = bessel_y(m - 1, x);
  double b = bessel_y(m + 1, x);
  if (!std::isfinite(b)) return std::numeric_limits<double>::infinity();
  return 0.5 * (a - b);
}

double bessel_j_second(int m, double x) {
  if (x == 0.0) {
    if (m == 0) return -0.5;
    if (m == 2) return 0.25;
    return 0.0;
  }
  double mm = static_cast<double>(m) * m;
  return -bessel_j_prime(m, x) / x - (1.0 - mm / (x * x)) * bessel_j(m, x);
}

double bessel_y_second(int m, double x) {
  double mm = static_cast<double>(m) * m;
  return -bessel_y_prime(m, x) / x - (1.0 - mm / (x * x)) * bessel_y(m, x);
}

double annulus_cross(int m, double ratio, double xi) {
  return bessel_j_prime(m, ratio * xi) * bessel_y_prime(m, xi) -
         bessel_j_prime(m, xi) * bessel_y_prime(m, ratio * xi);
}

double annulus_cross_prime(int m, double ratio, double xi) {
  double s = ratio * xi;
  return ratio * bessel_j_second(m, s) * bessel_y_prime(m, xi) +
         bessel_j_prime(m, s) * bessel_y_second(m, xi) -
         bessel_j_second(m, xi) * bessel_y_prime(m, s) -
         ratio * bessel_j_prime(m, xi) * bessel_y_second(m, s);
}

BesselZeroTable jprime_zeros(int m, int count) {
  if (m < 0) fail(ErrorCode::invalid_argument, "jprime_zeros: order must be non-negative");
  if (count < 1 || count > 500) fail(ErrorCode::invalid_argument, "jprime_zeros: count must lie in [1, 500]");
  auto f = [m](double x) { return bessel_j_prime(m, x); };
  auto df = [m](double x) { return bessel_j_second(m, x); };
  double x0 = jprime_start(m);
  double xmax = x0 + 2.0 * kPi * (count + 10) + 50.0;
  BesselZeroTable t;
  t.kind = ZeroKind::jprime;
  t.order = m;
  t.zeros = scan_zeros(f, df, x0, xmax, count, 0.0, "jprime_zeros");
  if (static_cast<int>(t.zeros.size()) < count) {
    fail(ErrorCode::convergence, "jprime_zeros: only " + std::to_string(t.zeros.size()) +
                                     " zeros found in " + bracket_text(x0, xmax));
  }
  return t;
}

std::vector<double> jprime_zeros_below(int m, double xmax) {
  if (m < 0) fail(ErrorCode::invalid_argument, "jprime_zeros_below: order must be non-negative");
  double x0 = jprime_start(m);
  if (xmax <= x0) return {};
  auto f = [m](double x) { return bessel_j_prime(m, x); };
  auto df = [m](double x) { return bessel_j_second(m, x); };
  return scan_zeros(f, df, x0, xmax, 0, 0.0, "jprime_zeros_below");
}

namespace {
void check_ratio(double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) fail(ErrorCode::invalid_argument, "annulus ratio must lie in (0, 1)");
}
}  // namespace

BesselZeroTable annulus_cross_zeros(int m, double ratio, int count) {
  if (m < 0) fail(ErrorCode::invalid_argument, "annulus_cross_zeros: order must be non-negative");
  check_ratio(ratio);
  if (count < 1 || count > 200) fail(ErrorCode::invalid_argument, "annulus_cross_zeros: count must lie in [1, 200]");
  auto f = [m, ratio](double x) { return annulus_cross(m, ratio, x); };
  auto df = [m, ratio](double x) { return annulus_cross_prime(m, ratio, x); };
  double x0 = jprime_start(m);
  double xmax = x0 + 2.0 * kPi * (count + 10) / (1.0 - ratio) + 50.0;
  BesselZeroTable t;
  t.kind = ZeroKind::annulus_cross;
  t.order = m;
  t.ratio = ratio;
  t.zeros = scan_zeros(f, df, x0, xmax, count, 1e-10, "annulus_cross_zeros");
  if (static_cast<int>(t.zeros.size()) < count) {
    fail(ErrorCode::convergence, "annulus_cross_zeros: only " + std::to_string(t.zeros.size()) +
                                     " zeros found in " + bracket_text(x0, xmax));
  }
  return t;
}

std::vector<double> annulus_cross_zeros_below(int m, double ratio, double xmax) {
  if (m < 0) fail(ErrorCode::invalid_argument, "annulus_cross_zeros_below: order must be non-negative");
  check_ratio(ratio);
  double x0 = jprime_start(m);
  if (xmax <= x0) return {};
  auto f = [m, ratio](double x) { return annulus_cross(m, ratio, x); };
  auto df = [m, ratio](double x) { return annulus_cross_prime(m, ratio, x); };
  return scan_zeros(f, df, x0, xmax, 0, 1e-10, "annulus_cross_zeros_below");
}

const char* to_string(ZeroKind kind) {
  return kind == ZeroKind::jprime ? "jprime" : "annulus_cross";
}

std::string to_json(const BesselZeroTable& table) {
  nlohmann::json j;
  j["kind"] = to_string(table.kind);
  j["m"] = table.order;
  if (table.kind == ZeroKind::annulus_cross) {
    j["ratio"] = table.ratio;
  } else {
    j["ratio"] = nullptr;
  }
  j["zeros"] = table.zeros;
  return j.dump();
}

}  // namespace fltc::special
