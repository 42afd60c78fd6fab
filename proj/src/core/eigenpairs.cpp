#include <algorithm>
#include <cmath>
#include <sstream>

#include "fltc/error.hpp"
#include "fltc/neumann_spectra.hpp"
#include "fltc/special_functions.hpp"

namespace fltc {
namespace sp = special;

namespace {

constexpr int kRadialSamples = 2000;

bool ties(double a, double b) { return std::abs(a - b) <= 1e-10 * std::max(1.0, std::max(a, b)); }

bool pair_less(const EigenPair& a, const EigenPair& b) {
  if (a.lambda != b.lambda) return a.lambda < b.lambda;
  return a.index < b.index;
}

void enumerate_rectangle(const Rectangle& rect, double lambda_max, std::vector<EigenPair>& out) {
  const std::size_t dim = rect.beta.size();
  std::vector<int> jmax(dim);
  for (std::size_t k = 0; k < dim; ++k)
    jmax[k] = static_cast<int>(std::floor(rect.beta[k] * std::sqrt(lambda_max) / M_PI)) + 1;
  std::vector<int> j(dim, 0);
  // odometer over the bounding box, pruned by the partial eigenvalue
  while (true) {
    double lam = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      double a = M_PI * j[k] / rect.beta[k];
      lam += a * a;
    }
    if (lam <= lambda_max * (1.0 + 1e-12)) {
      EigenPair e;
      e.lambda = lam;
      e.index = j;
      e.normalization = Normalization::max_normalized;
      double norm = 1.0;
      for (std::size_t k = 0; k < dim; ++k) norm *= j[k] > 0 ? 0.5 * rect.beta[k] : rect.beta[k];
      e.l2_norm_sq = norm;
      e.scale = 1.0;
      e.sup_value = e.sup_bound = 1.0;
      out.push_back(std::move(e));
    }
    std::size_t k = dim;
    while (k-- > 0) {
      if (++j[k] <= jmax[k]) break;
      j[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
}

// Fills normalization and sup data of a polar pair whose radial data is set.
void finish_polar(EigenPair& e, const DomainSpec& d) {
  const double R = d.outer_radius();
  const double r_in = d.inner_radius();
  const double span = d.angle_span();
  double angular_int;
  if (e.angular == 0) {
    angular_int = span;
  } else {
    angular_int = 0.5 * span;
  }
  double radial_int;
  if (e.root == 0.0) {
    radial_int = 0.5 * (R * R - r_in * r_in);
  } else {
    const double m2 = static_cast<double>(e.order) * e.order;
    auto term = [&](double z) {
      double u = e.coef_j * sp::bessel_j(e.order, z) + (e.coef_y != 0.0 ? e.coef_y * sp::bessel_y(e.order, z) : 0.0);
      return (z * z - m2) * u * u;
    };
    // int Z(c r / R)^2 r dr = (R/c)^2 [ (z^2 - m^2) Z(z)^2 / 2 ] at the end points, Z' = 0 there
    double hi = term(e.root);
    double lo = r_in > 0.0 ? term(e.root * r_in / R) : 0.0;
    radial_int = 0.5 * (R / e.root) * (R / e.root) * (hi - lo);
  }
  const double raw = angular_int * radial_int;
  if (!(raw > 0.0) || !std::isfinite(raw)) {
    fail(ErrorCode::convergence, "non-positive closed-form norm for eigenpair " + index_string(e));
  }
  e.scale = 1.0 / std::sqrt(raw);
  e.l2_norm_sq = 1.0;
  e.normalization = Normalization::orthonormal;

  if (e.root == 0.0) {
    e.sup_value = e.sup_bound = e.scale;
    e.radial_argmax = r_in;
    return;
  }
  double umax = 0.0, dmax = 0.0, argmax = r_in;
  const double h = (R - r_in) / (kRadialSamples - 1);
  for (int i = 0; i < kRadialSamples; ++i) {
    double r = i + 1 == kRadialSamples ? R : r_in + h * i;
    double u = std::abs(radial_value(e, d, r));
    double du = std::abs(radial_derivative(e, d, r));
    if (u > umax) {
      umax = u;
      argmax = r;
    }
    dmax = std::max(dmax, du);
  }
  e.sup_value = e.scale * umax;
  e.sup_bound = e.scale * (umax + 0.5 * h * dmax);
  e.radial_argmax = argmax;
}

void add_polar_family(const DomainSpec& d, int angular, int order, const std::vector<double>& roots,
                      bool two_parities, bool sector, std::vector<EigenPair>& out) {
  const double R = d.outer_radius();
  const double r_in = d.inner_radius();
  for (std::size_t k = 0; k < roots.size(); ++k) {
    EigenPair base;
    base.root = roots[k];
    base.lambda = (roots[k] / R) * (roots[k] / R);
    base.order = order;
    base.angular = angular;
    if (r_in > 0.0) {
      base.coef_j = sp::bessel_y_prime(order, roots[k]);
      base.coef_y = -sp::bessel_j_prime(order, roots[k]);
    }
    for (int parity = 0; parity < (two_parities && angular > 0 ? 2 : 1); ++parity) {
      EigenPair e = base;
      e.parity = angular == 0 ? Parity::none : (parity == 0 ? Parity::cosine : Parity::sine);
      out.push_back(e);
      EigenPair& added = out.back();
      if (sector) {
        added.index = {0, static_cast<int>(k + 1)};
      } else {
        added.index = {angular, static_cast<int>(k + 1), parity};
      }
      finish_polar(added, d);
    }
  }
}

void add_constant(const DomainSpec& d, bool sector, std::vector<EigenPair>& out) {
  EigenPair e;
  e.lambda = 0.0;
  e.root = 0.0;
  e.order = 0;
  e.angular = 0;
  e.index = sector ? std::vector<int>{0, 0} : std::vector<int>{0, 0, 0};
  finish_polar(e, d);
  out.push_back(e);
}

double weyl_guess(const DomainSpec& d, int count) {
  const int dim = d.dimension();
  const double unit_ball = std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
  return 4.0 * M_PI * M_PI * std::pow(count / (unit_ball * d.volume()), 2.0 / dim);
}

}  // namespace

const char* to_string(Normalization n) {
  return n == Normalization::orthonormal ? "orthonormal" : "max_normalized";
}

std::string index_string(const EigenPair& e) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < e.index.size(); ++i) os << (i ? "," : "") << e.index[i];
  os << ")";
  return os.str();
}

double radial_value(const EigenPair& e, const DomainSpec& d, double r) {
  if (e.root == 0.0) return 1.0;
  const double z = e.root * r / d.outer_radius();
  double u = e.coef_j * sp::bessel_j(e.order, z);
  if (e.coef_y != 0.0) u += e.coef_y * sp::bessel_y(e.order, z);
  return u;
}

double radial_derivative(const EigenPair& e, const DomainSpec& d, double r) {
  if (e.root == 0.0) return 0.0;
  const double k = e.root / d.outer_radius();
  const double z = k * r;
  double du = e.coef_j * sp::bessel_j_prime(e.order, z);
  if (e.coef_y != 0.0) du += e.coef_y * sp::bessel_y_prime(e.order, z);
  return k * du;
}

std::vector<EigenPair> eigenpairs_below(const DomainSpec& d, double lambda_max) {
  require(std::isfinite(lambda_max) && lambda_max >= 0.0, "eigenpairs_below: bad cutoff");
  std::vector<EigenPair> out;
  if (auto* rect = std::get_if<Rectangle>(&d.shape())) {
    enumerate_rectangle(*rect, lambda_max, out);
  } else {
    const double R = d.outer_radius();
    const double xmax = R * std::sqrt(lambda_max) * (1.0 + 1e-12);
    const bool sector = std::holds_alternative<Sector>(d.shape());
    add_constant(d, sector, out);
    if (sector) {
      const int q = std::get<Sector>(d.shape()).q;
      // J_nu' has no zero below nu, so the family loop stops once nu exceeds xmax
      for (int m = 0; q * m <= xmax; ++m) {
        const int nu = q * m;
        auto roots = sp::jprime_zeros_below(nu, xmax);
        std::size_t first = out.size();
        add_polar_family(d, nu, nu, roots, false, true, out);
        for (std::size_t i = first; i < out.size(); ++i) out[i].index[0] = m;
      }
    } else if (std::holds_alternative<Disk>(d.shape())) {
      for (int m = 0; m <= xmax; ++m) {
        add_polar_family(d, m, m, sp::jprime_zeros_below(m, xmax), true, false, out);
      }
    } else {
      const double ratio = d.inner_radius() / R;
      // the radial problem has eigenvalue above m^2 / R^2, so c_{m,1} > m
      for (int m = 0; m <= xmax; ++m) {
        add_polar_family(d, m, m, sp::annulus_cross_zeros_below(m, ratio, xmax), true, false, out);
      }
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [&](const EigenPair& e) { return e.lambda > lambda_max * (1.0 + 1e-12); }),
              out.end());
  }
  std::sort(out.begin(), out.end(), pair_less);
  return out;
}

std::vector<EigenPair> eigenpairs(const DomainSpec& d, int count) {
  require(count >= 1 && count <= 2000, "eigenpairs: count must lie in [1, 2000]");
  double cutoff = weyl_guess(d, count);
  std::vector<EigenPair> all;
  for (int attempt = 0; attempt < 60; ++attempt) {
    all = eigenpairs_below(d, cutoff);
    if (static_cast<int>(all.size()) > count) break;
    cutoff *= 1.5;
  }
  if (static_cast<int>(all.size()) < count) fail(ErrorCode::convergence, "eigenpairs: enumeration did not reach count");
  // every eigenvalue below the cutoff is present, so the first `count` are exact;
  // completing the class needs one entry past the end, which the strict `>` above guarantees
  std::size_t n = static_cast<std::size_t>(count);
  while (n < all.size() && ties(all[n].lambda, all[n - 1].lambda)) ++n;
  if (n == all.size()) {
    // class may continue above the cutoff
    auto more = eigenpairs_below(d, all.back().lambda * 1.01 + 1.0);
    all = std::move(more);
    while (n < all.size() && ties(all[n].lambda, all[n - 1].lambda)) ++n;
  }
  all.resize(n);
  return all;
}

std::vector<int> multiplicities(const std::vector<EigenPair>& pairs) {
  std::vector<int> out(pairs.size(), 1);
  std::size_t start = 0;
  for (std::size_t i = 1; i <= pairs.size(); ++i) {
    if (i == pairs.size() || !ties(pairs[i].lambda, pairs[start].lambda)) {
      for (std::size_t k = start; k < i; ++k) out[k] = static_cast<int>(i - start);
      start = i;
    }
  }
  return out;
}

double eval_unchecked(const EigenPair& e, const DomainSpec& d, const Point& p) {
  if (auto* rect = std::get_if<Rectangle>(&d.shape())) {
    double v = e.scale;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (e.index[k] != 0) v *= std::cos(M_PI * e.index[k] * p[k] / rect->beta[k]);
    }
    return v;
  }
  const double r = std::hypot(p[0], p[1]);
  double ang = 1.0;
  if (e.angular != 0) {
    const double theta = std::atan2(p[1], p[0]);
    const double arg = e.angular * (theta - e.angle_offset);
    ang = e.parity == Parity::sine ? std::sin(arg) : std::cos(arg);
  }
  return e.scale * radial_value(e, d, r) * ang;
}

Point gradient_unchecked(const EigenPair& e, const DomainSpec& d, const Point& p) {
  if (auto* rect = std::get_if<Rectangle>(&d.shape())) {
    const std::size_t dim = p.size();
    std::vector<double> c(dim), s(dim), w(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      w[k] = M_PI * e.index[k] / rect->beta[k];
      c[k] = std::cos(w[k] * p[k]);
      s[k] = std::sin(w[k] * p[k]);
    }
    Point g(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      double v = -e.scale * w[k] * s[k];
      for (std::size_t i = 0; i < dim; ++i)
        if (i != k) v *= c[i];
      g[k] = v;
    }
    return g;
  }
  const double R = d.outer_radius();
  const double r = std::hypot(p[0], p[1]);
  if (r <= 1e-14 * R) {
    if (e.order != 1 || e.angular != 1) return {0.0, 0.0};
    // J_1(k r) ~ k r / 2 near the centre
    const double slope = e.scale * e.coef_j * 0.5 * e.root / R;
    const double c0 = std::cos(e.angle_offset), s0 = std::sin(e.angle_offset);
    if (e.parity == Parity::sine) return {-slope * s0, slope * c0};
    return {slope * c0, slope * s0};
  }
  const double theta = std::atan2(p[1], p[0]);
  double ang = 1.0, dang = 0.0;
  if (e.angular != 0) {
    const double arg = e.angular * (theta - e.angle_offset);
    if (e.parity == Parity::sine) {
      ang = std::sin(arg);
      dang = e.angular * std::cos(arg);
    } else {
      ang = std::cos(arg);
      dang = -e.angular * std::sin(arg);
    }
  }
  const double u = radial_value(e, d, r);
  const double du = radial_derivative(e, d, r);
  const double dr = e.scale * du * ang;
  const double dt = e.scale * u * dang / r;
  const double ct = std::cos(theta), st = std::sin(theta);
  return {ct * dr - st * dt, st * dr + ct * dt};
}

namespace {
void check_point(const DomainSpec& d, const Point& p) {
  if (!d.contains(p, 1e-9)) {
    std::ostringstream os;
    os << "point (";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ") lies outside the " << d.kind();
    fail(ErrorCode::outside_domain, os.str());
  }
}
}  // namespace

double eval(const EigenPair& e, const DomainSpec& d, const Point& p) {
  check_point(d, p);
  return eval_unchecked(e, d, p);
}

Point eval_gradient(const EigenPair& e, const DomainSpec& d, const Point& p) {
  check_point(d, p);
  return gradient_unchecked(e, d, p);
}

}  // namespace fltc
