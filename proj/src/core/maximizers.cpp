#include <algorithm>
#include <cmath>
#include <numeric>

#include "fltc/error.hpp"
#include "fltc/neumann_spectra.hpp"
#include "fltc/special_functions.hpp"

namespace fltc {
namespace {

double diameter(const DomainSpec& d) {
  if (auto* r = std::get_if<Rectangle>(&d.shape())) {
    double s = 0.0;
    for (double b : r->beta) s += b * b;
    return std::sqrt(s);
  }
  return 2.0 * d.outer_radius();
}

double norm(const Point& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Projected ascent of |phi| from `start`, step length adapted by success.
Point ascend(const EigenPair& e, const DomainSpec& d, Point p, double step0) {
  double val = eval_unchecked(e, d, p);
  const double sign = val < 0.0 ? -1.0 : 1.0;
  double f = sign * val;
  double step = step0;
  const double stop = 1e-11 * diameter(d);
  for (int it = 0; it < 400 && step > stop; ++it) {
    Point g = gradient_unchecked(e, d, p);
    double gn = norm(g);
    if (gn == 0.0) break;
    Point cand(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) cand[k] = p[k] + step * sign * g[k] / gn;
    cand = d.project(cand);
    double fc = sign * eval_unchecked(e, d, cand);
    if (fc > f) {
      p = std::move(cand);
      f = fc;
      step *= 1.5;
    } else {
      step *= 0.5;
    }
  }
  return p;
}

std::vector<char> as_mask(const MaximizerSet& s, std::size_t n) {
  std::vector<char> m(n, 0);
  for (auto i : s.grid_indices) m[i] = 1;
  return m;
}

std::vector<std::size_t> mask_indices(const std::vector<char>& m) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i]) out.push_back(i);
  return out;
}

bool disjoint(const std::vector<char>& a, const std::vector<char>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && b[i]) return false;
  return true;
}

BasisCheck intersect(const std::vector<std::vector<char>>& sets, std::string name, double rotation) {
  BasisCheck out;
  out.basis = std::move(name);
  out.rotation = rotation;
  const std::size_t n = sets.empty() ? 0 : sets[0].size();
  std::vector<char> cur(n, 1);
  for (std::size_t j = 0; j < sets.size(); ++j) {
    std::vector<char> next(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = cur[i] && sets[j][i];
      any = any || next[i];
    }
    if (!any) {
      out.exists = false;
      out.witness = j;
      break;
    }
    cur.swap(next);
  }
  out.candidates = mask_indices(cur);
  for (std::size_t j = 1; j < sets.size() && !out.disjoint_pair; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (disjoint(sets[i], sets[j])) {
        out.disjoint_pair = std::array<std::size_t, 2>{i, j};
        break;
      }
    }
  }
  return out;
}

}  // namespace

MaximizerSet locate_maximizers(const EigenPair& e, const DomainSpec& d, const Grid& grid, double tol) {
  require(tol > 0.0 && tol <= 0.1, "locate_maximizers: tol must lie in (0, 0.1]");
  require(!grid.points.empty(), "locate_maximizers: empty grid");
  const std::size_t n = grid.size();
  std::vector<double> v(n);
  double gmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = std::abs(eval_unchecked(e, d, grid.points[i]));
    gmax = std::max(gmax, v[i]);
  }
  MaximizerSet out;
  out.max_abs = gmax;
  if (!e.is_constant()) {
    // refine from the best grid samples, skipping seeds close to an earlier one
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    double cell = *std::max_element(grid.spacing.begin(), grid.spacing.end());
    if (grid.polar) cell = std::max(grid.spacing[0], d.outer_radius() * grid.spacing[1]);
    std::vector<Point> seeds;
    for (std::size_t idx : order) {
      if (v[idx] < (1.0 - 2.0 * tol) * gmax || seeds.size() >= 24) break;
      bool near = false;
      for (const auto& s : seeds) {
        Point diff(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) diff[k] = s[k] - grid.points[idx][k];
        if (norm(diff) < 3.0 * cell) {
          near = true;
          break;
        }
      }
      if (!near) seeds.push_back(grid.points[idx]);
    }
    std::vector<std::pair<Point, double>> refined;
    for (const auto& s : seeds) {
      Point p = ascend(e, d, s, cell);
      double val = std::abs(eval_unchecked(e, d, p));
      out.max_abs = std::max(out.max_abs, val);
      refined.emplace_back(std::move(p), val);
    }
    const double thr = (1.0 - tol) * out.max_abs;
    for (auto& [p, val] : refined) {
      if (val < thr) continue;
      bool dup = false;
      for (const auto& q : out.refined) {
        Point diff(q.size());
        for (std::size_t k = 0; k < q.size(); ++k) diff[k] = q[k] - p[k];
        if (norm(diff) < 1e-6 * diameter(d)) dup = true;
      }
      if (!dup) out.refined.push_back(p);
    }
  }
  const double thr = (1.0 - tol) * out.max_abs;
  for (std::size_t i = 0; i < n; ++i)
    if (v[i] >= thr) out.grid_indices.push_back(i);
  return out;
}

CommonMaximizerReport common_maximizer_check(const DomainSpec& d, int count, double tol, int grid_n) {
  require(count >= 1, "common_maximizer_check: count must be positive");
  CommonMaximizerReport rep;
  rep.eigenpairs = eigenpairs(d, count);
  const Grid grid = Grid::natural(d, grid_n);
  const std::size_t n = grid.size();
  rep.grid_cell = grid.polar ? grid.spacing[0] : *std::max_element(grid.spacing.begin(), grid.spacing.end());
  const bool full_circle = std::holds_alternative<Disk>(d.shape()) || std::holds_alternative<Annulus>(d.shape());

  auto sets_for = [&](double rotation, std::vector<MaximizerSet>* keep) {
    std::vector<std::vector<char>> sets;
    for (const auto& e0 : rep.eigenpairs) {
      EigenPair e = e0;
      if (e.angular > 0 && rotation != 0.0) e.angle_offset = rotation / e.angular;
      MaximizerSet ms = locate_maximizers(e, d, grid, tol);
      sets.push_back(as_mask(ms, n));
      if (keep) keep->push_back(std::move(ms));
    }
    return sets;
  };

  std::vector<MaximizerSet> standard;
  auto base_sets = sets_for(0.0, &standard);
  rep.bases.push_back(intersect(base_sets, d.is_rectangle() ? "product" : "cos_sin", 0.0));
  if (full_circle) {
    for (int k = 1; k <= 8; ++k) {
      double rot = k * M_PI / 16.0;
      rep.bases.push_back(intersect(sets_for(rot, nullptr), "rotated_" + std::to_string(k), rot));
    }
    // Eigenspace level: the union of the maximizer sets of all unit vectors in a
    // (m, k) class with m >= 1 is the full circle band where |u(r)| is near its max.
    std::vector<std::vector<char>> class_sets;
    std::vector<std::size_t> class_first;
    for (std::size_t j = 0; j < rep.eigenpairs.size(); ++j) {
      const auto& e = rep.eigenpairs[j];
      if (j > 0 && e.angular > 0 && rep.eigenpairs[j - 1].index[0] == e.index[0] &&
          rep.eigenpairs[j - 1].index[1] == e.index[1]) {
        continue;
      }
      if (e.angular == 0) {
        class_sets.push_back(base_sets[j]);
      } else {
        double umax = e.sup_value / e.scale;
        std::vector<double> ur(n);
        for (std::size_t i = 0; i < n; ++i) {
          ur[i] = std::abs(radial_value(e, d, grid.chart[i][0]));
          umax = std::max(umax, ur[i]);
        }
        std::vector<char> m(n, 0);
        for (std::size_t i = 0; i < n; ++i) m[i] = ur[i] >= (1.0 - tol) * umax;
        class_sets.push_back(std::move(m));
      }
      class_first.push_back(j);
    }
    BasisCheck cls = intersect(class_sets, "eigenspace", 0.0);
    ClassCheck cc;
    cc.exists = cls.exists;
    if (cls.witness) cc.witness = class_first[*cls.witness];
    cc.candidates = cls.candidates;
    rep.eigenspace = cc;
    rep.exists = cc.exists;
  } else {
    rep.exists = rep.bases[0].exists;
  }
  rep.witness = rep.bases[0].witness;
  rep.disjoint_pair = rep.bases[0].disjoint_pair;
  for (auto i : rep.bases[0].candidates) rep.candidates.push_back(grid.points[i]);

  for (std::size_t j = 0; j < rep.eigenpairs.size(); ++j) {
    const auto& e = rep.eigenpairs[j];
    PairSummary ps;
    ps.position = j;
    ps.index = e.index;
    ps.lambda = e.lambda;
    ps.maximizer_count = standard[j].grid_indices.size();
    if (grid.polar && !standard[j].grid_indices.empty()) {
      ps.min_radius = std::numeric_limits<double>::infinity();
      ps.max_radius = 0.0;
      for (auto i : standard[j].grid_indices) {
        ps.min_radius = std::min(ps.min_radius, grid.chart[i][0]);
        ps.max_radius = std::max(ps.max_radius, grid.chart[i][0]);
      }
      if (!e.is_constant() && !std::holds_alternative<Annulus>(d.shape())) {
        if (e.order == 0) {
          ps.predicted_radius = 0.0;
        } else {
          double first = special::jprime_zeros(e.order, 1).zeros[0];
          ps.predicted_radius = first / e.root * d.outer_radius();
        }
      }
    }
    rep.pairs.push_back(std::move(ps));
  }
  return rep;
}

}  // namespace fltc
