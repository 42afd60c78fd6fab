#include <algorithm>
#include <cmath>

#include "fltc/error.hpp"
#include "fltc/neumann_spectra.hpp"

namespace fltc {
namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

double wrap_angle(double theta) {
  // maps atan2 output (-pi, pi] to [0, 2pi)
  return theta < 0.0 ? theta + 2.0 * M_PI : theta;
}

}  // namespace

DomainSpec DomainSpec::rectangle(std::vector<double> beta) {
  require(!beta.empty(), "rectangle needs at least one side length");
  for (double b : beta) require(positive_finite(b), "rectangle side lengths must be positive");
  return DomainSpec(Rectangle{std::move(beta)});
}

DomainSpec DomainSpec::disk(double R) {
  require(positive_finite(R), "disk radius must be positive");
  return DomainSpec(Disk{R});
}

DomainSpec DomainSpec::sector(int q, double R) {
  require(q >= 1, "sector q must be a positive integer");
  require(positive_finite(R), "sector radius must be positive");
  return DomainSpec(Sector{q, R});
}

DomainSpec DomainSpec::annulus(double r0, double R) {
  require(positive_finite(r0) && positive_finite(R), "annulus radii must be positive");
  require(r0 < R, "annulus needs r0 < R");
  return DomainSpec(Annulus{r0, R});
}

std::string DomainSpec::kind() const {
  switch (shape_.index()) {
    case 0: return "rectangle";
    case 1: return "disk";
    case 2: return "sector";
    default: return "annulus";
  }
}

int DomainSpec::dimension() const {
  if (auto* r = std::get_if<Rectangle>(&shape_)) return static_cast<int>(r->beta.size());
  return 2;
}

double DomainSpec::volume() const {
  return std::visit(
      [](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Rectangle>) {
          double v = 1.0;
          for (double b : s.beta) v *= b;
          return v;
        } else if constexpr (std::is_same_v<S, Disk>) {
          return M_PI * s.R * s.R;
        } else if constexpr (std::is_same_v<S, Sector>) {
          return 0.5 * (M_PI / s.q) * s.R * s.R;
        } else {
          return M_PI * (s.R * s.R - s.r0 * s.r0);
        }
      },
      shape_);
}

double DomainSpec::perimeter() const {
  return std::visit(
      [](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Rectangle>) {
          double total = 0.0;
          for (std::size_t k = 0; k < s.beta.size(); ++k) {
            double face = 1.0;
            for (std::size_t i = 0; i < s.beta.size(); ++i)
              if (i != k) face *= s.beta[i];
            total += 2.0 * face;
          }
          return total;
        } else if constexpr (std::is_same_v<S, Disk>) {
          return 2.0 * M_PI * s.R;
        } else if constexpr (std::is_same_v<S, Sector>) {
          return 2.0 * s.R + M_PI * s.R / s.q;
        } else {
          return 2.0 * M_PI * (s.R + s.r0);
        }
      },
      shape_);
}

double DomainSpec::inner_radius() const {
  if (auto* a = std::get_if<Annulus>(&shape_)) return a->r0;
  return 0.0;
}

double DomainSpec::outer_radius() const {
  if (auto* a = std::get_if<Annulus>(&shape_)) return a->R;
  if (auto* s = std::get_if<Sector>(&shape_)) return s->R;
  if (auto* c = std::get_if<Disk>(&shape_)) return c->R;
  fail(ErrorCode::invalid_argument, "outer_radius: rectangle has no radius");
}

double DomainSpec::angle_span() const {
  if (auto* s = std::get_if<Sector>(&shape_)) return M_PI / s->q;
  return 2.0 * M_PI;
}

bool DomainSpec::contains(const Point& p, double slack) const {
  if (static_cast<int>(p.size()) != dimension()) return false;
  for (double v : p)
    if (!std::isfinite(v)) return false;
  if (auto* r = std::get_if<Rectangle>(&shape_)) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      double tol = slack * r->beta[k];
      if (p[k] < -tol || p[k] > r->beta[k] + tol) return false;
    }
    return true;
  }
  double R = outer_radius();
  double rad = std::hypot(p[0], p[1]);
  if (rad > R * (1.0 + slack)) return false;
  if (rad < inner_radius() * (1.0 - slack)) return false;
  if (auto* s = std::get_if<Sector>(&shape_)) {
    if (rad <= slack * R) return true;
    double theta = wrap_angle(std::atan2(p[1], p[0]));
    double span = M_PI / s->q;
    double ang_tol = std::max(1e-9, slack);
    if (theta <= span + ang_tol) return true;
    return theta >= 2.0 * M_PI - ang_tol;
  }
  return true;
}

Point DomainSpec::project(const Point& p) const {
  require(static_cast<int>(p.size()) == dimension(), "project: dimension mismatch");
  Point q = p;
  if (auto* r = std::get_if<Rectangle>(&shape_)) {
    for (std::size_t k = 0; k < q.size(); ++k) q[k] = std::clamp(q[k], 0.0, r->beta[k]);
    return q;
  }
  double R = outer_radius();
  if (auto* s = std::get_if<Sector>(&shape_)) {
    double theta = std::atan2(q[1], q[0]);
    double span = M_PI / s->q;
    if (theta < 0.0 || theta > span) {
      // nearest of the two edge rays
      double best = -1.0;
      Point best_pt{0.0, 0.0};
      for (double edge : {0.0, span}) {
        double ex = std::cos(edge), ey = std::sin(edge);
        double t = std::max(0.0, q[0] * ex + q[1] * ey);
        Point c{t * ex, t * ey};
        double dist = std::hypot(q[0] - c[0], q[1] - c[1]);
        if (best < 0.0 || dist < best) {
          best = dist;
          best_pt = c;
        }
      }
      q = best_pt;
    }
  }
  double rad = std::hypot(q[0], q[1]);
  double r_in = inner_radius();
  if (rad > R) {
    q[0] *= R / rad;
    q[1] *= R / rad;
  } else if (rad < r_in) {
    if (rad == 0.0) return {r_in, 0.0};
    q[0] *= r_in / rad;
    q[1] *= r_in / rad;
  }
  return q;
}

Grid Grid::natural(const DomainSpec& d, int n, int angular) {
  require(n >= 2, "grid needs at least 2 samples per axis");
  Grid g;
  if (auto* rect = std::get_if<Rectangle>(&d.shape())) {
    const std::size_t dim = rect->beta.size();
    g.shape.assign(dim, n);
    for (double b : rect->beta) g.spacing.push_back(b / (n - 1));
    std::size_t total = 1;
    for (std::size_t k = 0; k < dim; ++k) total *= static_cast<std::size_t>(n);
    g.points.reserve(total);
    std::vector<int> idx(dim, 0);
    for (std::size_t lin = 0; lin < total; ++lin) {
      Point p(dim);
      for (std::size_t k = 0; k < dim; ++k) p[k] = rect->beta[k] * idx[k] / (n - 1);
      g.points.push_back(std::move(p));
      for (std::size_t k = dim; k-- > 0;) {
        if (++idx[k] < n) break;
        idx[k] = 0;
      }
    }
    g.chart = g.points;
    return g;
  }

  g.polar = true;
  const double R = d.outer_radius();
  const double r_in = d.inner_radius();
  const bool sector = std::holds_alternative<Sector>(d.shape());
  const double span = d.angle_span();
  int n_theta = angular;
  if (n_theta <= 0) {
    n_theta = sector ? std::max(3, static_cast<int>(std::lround(8.0 * (n - 1) * span / (2.0 * M_PI))) + 1)
                     : 8 * (n - 1);
  }
  require(n_theta >= 3, "polar grid needs at least 3 angular samples");
  g.shape = {n, n_theta};
  g.spacing = {(R - r_in) / (n - 1), sector ? span / (n_theta - 1) : span / n_theta};
  for (int i = 0; i < n; ++i) {
    double r = r_in + (R - r_in) * i / (n - 1);
    if (i == n - 1) r = R;
    if (r == 0.0) {
      g.points.push_back({0.0, 0.0});
      g.chart.push_back({0.0, 0.0});
      continue;
    }
    for (int k = 0; k < n_theta; ++k) {
      double theta = sector ? span * k / (n_theta - 1) : span * k / n_theta;
      g.points.push_back({r * std::cos(theta), r * std::sin(theta)});
      g.chart.push_back({r, theta});
    }
  }
  return g;
}

}  // namespace fltc
