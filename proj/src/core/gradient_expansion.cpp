#include <algorithm>
#include <cmath>

#include "fltc/error.hpp"
#include "fltc/neumann_spectra.hpp"

namespace fltc {
namespace {

int quadrature_nodes(std::size_t dim) {
  if (dim <= 2) return 513;
  if (dim == 3) return 65;
  return 17;
}

// <h, omega_j> for every pair by tensor trapezoid quadrature with n nodes per axis.
std::vector<double> coefficients(const Rectangle& rect, const TestFunction& h,
                                 const std::vector<EigenPair>& pairs, int n) {
  const std::size_t dim = rect.beta.size();
  std::size_t total = 1;
  for (std::size_t k = 0; k < dim; ++k) total *= static_cast<std::size_t>(n);
  int jmax = 0;
  for (const auto& e : pairs)
    for (int j : e.index) jmax = std::max(jmax, j);
  // cosine tables per axis already multiplied by the trapezoid weight
  std::vector<std::vector<double>> table(dim, std::vector<double>(static_cast<std::size_t>(jmax + 1) * n));
  for (std::size_t k = 0; k < dim; ++k) {
    const double hk = rect.beta[k] / (n - 1);
    for (int j = 0; j <= jmax; ++j) {
      for (int a = 0; a < n; ++a) {
        double w = (a == 0 || a == n - 1) ? 0.5 * hk : hk;
        table[k][static_cast<std::size_t>(j) * n + a] = w * std::cos(M_PI * j * (hk * a) / rect.beta[k]);
      }
    }
  }
  std::vector<double> values(total);
  std::vector<int> idx(dim, 0);
  for (std::size_t lin = 0; lin < total; ++lin) {
    Point p(dim);
    for (std::size_t k = 0; k < dim; ++k) p[k] = rect.beta[k] * idx[k] / (n - 1);
    values[lin] = h.value(p);
    for (std::size_t k = dim; k-- > 0;) {
      if (++idx[k] < n) break;
      idx[k] = 0;
    }
  }
  std::vector<double> out(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    // contract the last axis first, then the remaining ones
    std::vector<double> cur = values;
    std::size_t len = total;
    for (std::size_t k = dim; k-- > 0;) {
      const double* row = &table[k][static_cast<std::size_t>(pairs[p].index[k]) * n];
      std::size_t outer = len / n;
      std::vector<double> next(outer);
      for (std::size_t o = 0; o < outer; ++o) {
        double s = 0.0;
        for (int a = 0; a < n; ++a) s += cur[o * n + a] * row[a];
        next[o] = s;
      }
      cur.swap(next);
      len = outer;
    }
    out[p] = cur[0] / std::sqrt(pairs[p].l2_norm_sq);
  }
  return out;
}

}  // namespace

TestFunction eigen_combination(const DomainSpec& d, const std::vector<EigenPair>& pairs,
                               const std::vector<std::pair<std::size_t, double>>& terms) {
  std::vector<std::pair<EigenPair, double>> parts;
  for (auto [j, a] : terms) {
    require(j < pairs.size(), "eigen_combination: index out of range");
    parts.emplace_back(pairs[j], a / std::sqrt(pairs[j].l2_norm_sq));
  }
  TestFunction h;
  h.name = "eigen_combination";
  h.value = [d, parts](const Point& x) {
    double v = 0.0;
    for (const auto& [e, a] : parts) v += a * eval_unchecked(e, d, x);
    return v;
  };
  h.gradient = [d, parts](const Point& x) {
    Point g(x.size(), 0.0);
    for (const auto& [e, a] : parts) {
      Point ge = gradient_unchecked(e, d, x);
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += a * ge[k];
    }
    return g;
  };
  return h;
}

TestFunction smooth_bump(const Point& centre, double radius, double amplitude) {
  require(radius > 0.0, "smooth_bump: radius must be positive");
  TestFunction h;
  h.name = "smooth_bump";
  auto s_of = [centre, radius](const Point& x) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - centre[k]) * (x[k] - centre[k]);
    return s / (radius * radius);
  };
  h.value = [=](const Point& x) {
    double s = s_of(x);
    return s < 1.0 ? amplitude * std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
  };
  h.gradient = [=](const Point& x) {
    double s = s_of(x);
    Point g(x.size(), 0.0);
    if (s >= 1.0) return g;
    double v = amplitude * std::exp(1.0 - 1.0 / (1.0 - s));
    double ds = -v / ((1.0 - s) * (1.0 - s));
    for (std::size_t k = 0; k < x.size(); ++k) g[k] = ds * 2.0 * (x[k] - centre[k]) / (radius * radius);
    return g;
  };
  return h;
}

GradientExpansionReport gradient_expansion_check(const DomainSpec& d, const TestFunction& h,
                                                 const std::vector<int>& counts, int sample_n) {
  const auto* rect = std::get_if<Rectangle>(&d.shape());
  require(rect != nullptr, "gradient_expansion_check: rectangle domains only");
  require(!counts.empty(), "gradient_expansion_check: no counts given");
  require(sample_n >= 2, "gradient_expansion_check: sample grid too small");
  std::vector<int> sorted = counts;
  std::sort(sorted.begin(), sorted.end());
  const auto pairs = eigenpairs(d, sorted.back());

  std::vector<std::size_t> used;
  for (int c : sorted) {
    std::size_t n = std::min<std::size_t>(c, pairs.size());
    while (n < pairs.size() && std::abs(pairs[n].lambda - pairs[n - 1].lambda) <=
                                   1e-10 * std::max(1.0, pairs[n].lambda))
      ++n;
    used.push_back(n);
  }

  GradientExpansionReport rep;
  const std::size_t dim = rect->beta.size();
  rep.quadrature_nodes = quadrature_nodes(dim);
  auto coarse = coefficients(*rect, h, pairs, (rep.quadrature_nodes - 1) / 2 + 1);
  auto coef = coefficients(*rect, h, pairs, rep.quadrature_nodes);
  double cmax = 0.0, diff = 0.0;
  for (std::size_t j = 0; j < coef.size(); ++j) {
    cmax = std::max(cmax, std::abs(coef[j]));
    diff = std::max(diff, std::abs(coef[j] - coarse[j]));
  }
  if (diff > 1e-9 * std::max(1.0, cmax)) {
    fail(ErrorCode::quadrature, "gradient_expansion_check: coefficients change by " + num(diff) +
                                    " when the quadrature nodes are halved");
  }
  rep.coefficients = coef;

  // sample grid
  const Grid grid = Grid::natural(d, sample_n);
  const std::size_t np = grid.size();
  std::size_t probe = 0;
  double steepest = -1.0;
  std::vector<double> hv(np);
  std::vector<Point> hg(np);
  for (std::size_t i = 0; i < np; ++i) {
    hv[i] = h.value(grid.points[i]);
    hg[i] = h.gradient(grid.points[i]);
    double gn = 0.0;
    for (double g : hg[i]) gn += g * g;
    if (gn > steepest) {
      steepest = gn;
      probe = i;
    }
  }
  rep.probe = grid.points[probe];
  rep.probe_exact_gradient = hg[probe];
  rep.rows.resize(sorted.size());
  for (std::size_t c = 0; c < sorted.size(); ++c) {
    rep.rows[c].count = sorted[c];
    rep.rows[c].pairs_used = used[c];
  }
  std::vector<double> omega_scale(pairs.size());
  for (std::size_t j = 0; j < pairs.size(); ++j) omega_scale[j] = coef[j] / std::sqrt(pairs[j].l2_norm_sq);
  for (std::size_t i = 0; i < np; ++i) {
    double v = 0.0;
    Point g(dim, 0.0);
    std::size_t next = 0;
    for (std::size_t j = 0; j < pairs.size() && next < used.size(); ++j) {
      if (omega_scale[j] != 0.0) {
        v += omega_scale[j] * eval_unchecked(pairs[j], d, grid.points[i]);
        Point gj = gradient_unchecked(pairs[j], d, grid.points[i]);
        for (std::size_t k = 0; k < dim; ++k) g[k] += omega_scale[j] * gj[k];
      }
      while (next < used.size() && j + 1 == used[next]) {
        auto& row = rep.rows[next];
        row.max_value_error = std::max(row.max_value_error, std::abs(v - hv[i]));
        double ge = 0.0;
        for (std::size_t k = 0; k < dim; ++k) ge = std::max(ge, std::abs(g[k] - hg[i][k]));
        row.max_gradient_error = std::max(row.max_gradient_error, ge);
        if (i == probe) row.probe_gradient = g;
        ++next;
      }
    }
  }
  for (std::size_t c = 1; c < rep.rows.size(); ++c) {
    if (rep.rows[c].max_value_error > rep.rows[c - 1].max_value_error + 1e-9) rep.value_monotone = false;
    if (rep.rows[c].max_gradient_error > rep.rows[c - 1].max_gradient_error + 1e-9) rep.gradient_monotone = false;
  }
  return rep;
}

}  // namespace fltc
