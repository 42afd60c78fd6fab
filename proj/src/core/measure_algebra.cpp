#include "fltc/measure_algebra.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>

#include "fltc/error.hpp"
#include "json.hpp"

namespace fltc {

GridPoints make_grid_points(std::vector<Point> points) {
  return std::make_shared<const std::vector<Point>>(std::move(points));
}

void check_same_grid(const GridPoints& a, const GridPoints& b, const char* where) {
  if (!a || !b) fail(ErrorCode::grid_mismatch, std::string(where) + ": measure without a grid");
  if (a == b) return;
  if (*a != *b) fail(ErrorCode::grid_mismatch, std::string(where) + ": measures live on different grids");
}

DiscreteMeasure::DiscreteMeasure(GridPoints grid, std::vector<double> weights)
    : grid_(std::move(grid)), weights_(std::move(weights)) {
  require(grid_ != nullptr, "DiscreteMeasure: null grid");
  if (weights_.size() != grid_->size()) {
    fail(ErrorCode::grid_mismatch, "DiscreteMeasure: " + std::to_string(weights_.size()) + " weights for " +
                                       std::to_string(grid_->size()) + " grid points");
  }
}

DiscreteMeasure DiscreteMeasure::zero(GridPoints grid) {
  const std::size_t n = grid->size();
  return DiscreteMeasure(std::move(grid), std::vector<double>(n, 0.0));
}

DiscreteMeasure DiscreteMeasure::delta(GridPoints grid, std::size_t index) {
  require(index < grid->size(), "delta: index outside the grid");
  DiscreteMeasure m = zero(std::move(grid));
  m.weights_[index] = 1.0;
  return m;
}

double DiscreteMeasure::total_variation() const {
  double s = 0.0;
  for (double w : weights_) s += std::abs(w);
  return s;
}

double DiscreteMeasure::mass() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

bool DiscreteMeasure::is_probability() const {
  for (double w : weights_)
    if (w < -1e-12) return false;
  return std::abs(mass() - 1.0) <= 1e-10;
}

bool DiscreteMeasure::is_positive() const {
  return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w >= 0.0; });
}

double DiscreteMeasure::integrate(const std::vector<double>& f) const {
  if (f.size() != weights_.size()) fail(ErrorCode::grid_mismatch, "integrate: function has the wrong length");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * weights_[i];
  return s;
}

DiscreteMeasure& DiscreteMeasure::operator+=(const DiscreteMeasure& o) {
  check_same_grid(grid_, o.grid_, "measure sum");
  for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] += o.weights_[i];
  return *this;
}

DiscreteMeasure& DiscreteMeasure::operator*=(double c) {
  for (double& w : weights_) w *= c;
  return *this;
}

double tv_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  check_same_grid(a.grid(), b.grid(), "tv_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

// ---------------------------------------------------------------------------

ConvolutionTable::ConvolutionTable(GridPoints grid, std::size_t identity, std::vector<std::size_t> offsets,
                                   std::vector<Atom> atoms)
    : grid_(std::move(grid)), identity_(identity), offsets_(std::move(offsets)), atoms_(std::move(atoms)) {
  require(grid_ != nullptr && !grid_->empty(), "ConvolutionTable: empty grid");
  const std::size_t g = grid_->size();
  require(identity_ < g, "ConvolutionTable: identity index outside the grid");
  require(offsets_.size() == g * g + 1 && offsets_.back() == atoms_.size(), "ConvolutionTable: malformed rows");
  for (const auto& a : atoms_) require(a.index < g, "ConvolutionTable: atom index outside the grid");
}

ConvolutionTable ConvolutionTable::from_rows(GridPoints grid, std::size_t identity,
                                             const std::vector<std::vector<Atom>>& rows) {
  const std::size_t g = grid->size();
  require(rows.size() == g * g, "ConvolutionTable: need one row per ordered grid pair");
  std::vector<std::size_t> offsets{0};
  std::vector<Atom> atoms;
  for (const auto& r : rows) {
    atoms.insert(atoms.end(), r.begin(), r.end());
    offsets.push_back(atoms.size());
  }
  return ConvolutionTable(std::move(grid), identity, std::move(offsets), std::move(atoms));
}

std::pair<const Atom*, const Atom*> ConvolutionTable::row(std::size_t i, std::size_t j) const {
  const std::size_t r = i * size() + j;
  return {atoms_.data() + offsets_[r], atoms_.data() + offsets_[r + 1]};
}

std::string ConvolutionTable::to_json() const {
  nlohmann::json j;
  j["grid"] = *grid_;
  j["identity_index"] = identity_;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r + 1 < offsets_.size(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) row.push_back({atoms_[k].index, atoms_[k].weight});
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump();
}

ConvolutionTable ConvolutionTable::from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    auto grid = make_grid_points(j.at("grid").get<std::vector<Point>>());
    std::vector<std::vector<Atom>> rows;
    for (const auto& row : j.at("rows")) {
      std::vector<Atom> r;
      for (const auto& a : row) r.push_back({a.at(0).get<std::uint32_t>(), a.at(1).get<double>()});
      rows.push_back(std::move(r));
    }
    return from_rows(grid, j.at("identity_index").get<std::size_t>(), rows);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("ConvolutionTable JSON: ") + e.what());
  }
}

namespace {

std::size_t locate(const std::vector<double>& axis, double v, double beta) {
  auto it = std::lower_bound(axis.begin(), axis.end(), v);
  std::size_t best = axis.size();
  double err = INFINITY;
  for (auto c : {it, it == axis.begin() ? it : it - 1}) {
    if (c == axis.end()) continue;
    double e = std::abs(*c - v);
    if (e < err) {
      err = e;
      best = static_cast<std::size_t>(c - axis.begin());
    }
  }
  if (best == axis.size() || err > 1e-12 * beta) {
    fail(ErrorCode::grid_not_closed, "rectangle_table: reflection image " + num(v) +
                                         " is not a grid node; use a grid closed under the two-point law");
  }
  return best;
}

}  // namespace

ConvolutionTable rectangle_table(const std::vector<double>& betas, const std::vector<std::vector<double>>& axis_grids) {
  const std::size_t d = betas.size();
  require(d >= 1 && axis_grids.size() == d, "rectangle_table: one grid per axis is required");
  std::vector<std::size_t> n(d);
  for (std::size_t k = 0; k < d; ++k) {
    const auto& a = axis_grids[k];
    require(betas[k] > 0.0 && std::isfinite(betas[k]), "rectangle_table: beta must be positive");
    require(a.size() >= 2, "rectangle_table: each axis needs two nodes");
    for (std::size_t i = 1; i < a.size(); ++i) require(a[i] > a[i - 1], "rectangle_table: axis grid must increase");
    require(a.front() == 0.0 && std::abs(a.back() - betas[k]) <= 1e-12 * betas[k],
            "rectangle_table: axis grid must span [0, beta]");
    n[k] = a.size();
  }
  // per-axis two-point atoms
  std::vector<std::vector<std::vector<Atom>>> axis_rows(d);
  for (std::size_t k = 0; k < d; ++k) {
    const auto& a = axis_grids[k];
    const double b = betas[k];
    axis_rows[k].resize(n[k] * n[k]);
    for (std::size_t i = 0; i < n[k]; ++i) {
      for (std::size_t j = 0; j < n[k]; ++j) {
        std::size_t p = locate(a, std::abs(a[i] - a[j]), b);
        std::size_t q = locate(a, b - std::abs(b - a[i] - a[j]), b);
        auto& row = axis_rows[k][i * n[k] + j];
        if (p == q) {
          row.push_back({static_cast<std::uint32_t>(p), 1.0});
        } else {
          row.push_back({static_cast<std::uint32_t>(std::min(p, q)), 0.5});
          row.push_back({static_cast<std::uint32_t>(std::max(p, q)), 0.5});
        }
      }
    }
  }
  std::size_t g = 1;
  for (auto v : n) g *= v;
  std::vector<Point> points;
  points.reserve(g);
  std::vector<std::size_t> stride(d, 1);
  for (std::size_t k = d - 1; k-- > 0;) stride[k] = stride[k + 1] * n[k + 1];
  auto unravel = [&](std::size_t lin, std::vector<std::size_t>& idx) {
    for (std::size_t k = 0; k < d; ++k) {
      idx[k] = lin / stride[k];
      lin %= stride[k];
    }
  };
  std::vector<std::size_t> ix(d), iy(d);
  for (std::size_t lin = 0; lin < g; ++lin) {
    unravel(lin, ix);
    Point p(d);
    for (std::size_t k = 0; k < d; ++k) p[k] = axis_grids[k][ix[k]];
    points.push_back(std::move(p));
  }
  std::vector<std::size_t> offsets{0};
  std::vector<Atom> atoms;
  atoms.reserve(g * g * (std::size_t{1} << std::min<std::size_t>(d, 3)));
  std::vector<Atom> cur, next;
  for (std::size_t i = 0; i < g; ++i) {
    unravel(i, ix);
    for (std::size_t j = 0; j < g; ++j) {
      unravel(j, iy);
      cur.assign(1, Atom{0, 1.0});
      for (std::size_t k = 0; k < d; ++k) {
        next.clear();
        for (const auto& c : cur)
          for (const auto& a : axis_rows[k][ix[k] * n[k] + iy[k]])
            next.push_back({static_cast<std::uint32_t>(c.index + a.index * stride[k]), c.weight * a.weight});
        cur.swap(next);
      }
      std::sort(cur.begin(), cur.end(), [](const Atom& a, const Atom& b) { return a.index < b.index; });
      atoms.insert(atoms.end(), cur.begin(), cur.end());
      offsets.push_back(atoms.size());
    }
  }
  return ConvolutionTable(make_grid_points(std::move(points)), 0, std::move(offsets), std::move(atoms));
}

ConvolutionTable rectangle_table(const std::vector<double>& betas, int n_per_axis) {
  require(n_per_axis >= 2, "rectangle_table: need at least two nodes per axis");
  std::vector<std::vector<double>> grids;
  for (double b : betas) {
    std::vector<double> a(static_cast<std::size_t>(n_per_axis));
    for (int i = 0; i < n_per_axis; ++i) a[i] = b * i / (n_per_axis - 1);
    a.back() = b;
    grids.push_back(std::move(a));
  }
  return rectangle_table(betas, grids);
}

std::vector<double> rectangle_quadrature(const std::vector<double>& betas, int n_per_axis) {
  std::vector<double> w{1.0};
  for (double b : betas) {
    const double h = b / (n_per_axis - 1);
    std::vector<double> next;
    for (double v : w)
      for (int i = 0; i < n_per_axis; ++i) next.push_back(v * ((i == 0 || i == n_per_axis - 1) ? 0.5 * h : h));
    w.swap(next);
  }
  return w;
}

DiscreteMeasure convolve(const ConvolutionTable& table, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_same_grid(table.grid(), mu.grid(), "convolve");
  check_same_grid(table.grid(), nu.grid(), "convolve");
  const std::size_t g = table.size();
  std::vector<std::size_t> nz;
  for (std::size_t j = 0; j < g; ++j)
    if (nu[j] != 0.0) nz.push_back(j);
  std::vector<double> out(g, 0.0);
  for (std::size_t i = 0; i < g; ++i) {
    const double mi = mu[i];
    if (mi == 0.0) continue;
    for (std::size_t j : nz) {
      const double c = mi * nu[j];
      auto [b, e] = table.row(i, j);
      for (const Atom* a = b; a != e; ++a) out[a->index] += c * a->weight;
    }
  }
  return DiscreteMeasure(table.grid(), std::move(out));
}

DiscreteMeasure nfold(const ConvolutionTable& table, const DiscreteMeasure& nu, int n) {
  require(n >= 0, "nfold: n must be non-negative");
  check_same_grid(table.grid(), nu.grid(), "nfold");
  DiscreteMeasure result = DiscreteMeasure::delta(table.grid(), table.identity());
  DiscreteMeasure base = nu;
  bool first = true;
  while (n > 0) {
    if (n & 1) {
      result = first ? base : convolve(table, result, base);
      first = false;
    }
    n >>= 1;
    if (n > 0) base = convolve(table, base, base);
  }
  return result;
}

PoissonResult poisson(const ConvolutionTable& table, const DiscreteMeasure& nu) {
  check_same_grid(table.grid(), nu.grid(), "poisson");
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] < 0.0) {
      fail(ErrorCode::signed_input, "poisson: jump measure has negative weight " + num(nu[i]) +
                                        " at index " + std::to_string(i));
    }
  }
  const double m = nu.mass();
  PoissonResult out;
  DiscreteMeasure term = DiscreteMeasure::delta(table.grid(), table.identity());
  term *= std::exp(-m);
  out.measure = term;
  if (m == 0.0) return out;
  for (int k = 1; k < 100000; ++k) {
    term = convolve(table, term, nu);
    term *= 1.0 / k;
    out.measure += term;
    out.terms = k;
    // TV of the dropped terms is P(N > k) for N ~ Poisson(m)
    out.tail_bound = boost::math::gamma_p(static_cast<double>(k + 1), m);
    if (out.tail_bound < 1e-12) break;
  }
  if (out.tail_bound >= 1e-12) fail(ErrorCode::convergence, "poisson: series did not reach the tail tolerance");
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> TrivializingFamily::transform(const DiscreteMeasure& mu) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& phi : values) out.push_back(mu.integrate(phi));
  return out;
}

TrivializingFamily rectangle_family(const DomainSpec& d, const std::vector<Point>& grid, int count) {
  require(d.is_rectangle(), "rectangle_family: rectangle domain required");
  TrivializingFamily f;
  auto pairs = eigenpairs(d, count);
  pairs.resize(static_cast<std::size_t>(count));
  for (const auto& e : pairs) {
    std::vector<double> v;
    v.reserve(grid.size());
    for (const auto& p : grid) v.push_back(eval_unchecked(e, d, p));
    f.values.push_back(std::move(v));
    f.lambdas.push_back(e.lambda);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    bool corner = std::all_of(grid[i].begin(), grid[i].end(), [](double c) { return c == 0.0; });
    if (corner) f.identity = i;
  }
  return f;
}

LevyKhintchineReport levy_khintchine_check(const ConvolutionTable& table, const TrivializingFamily& family,
                                           const DiscreteMeasure& nu) {
  require(nu[table.identity()] == 0.0, "levy_khintchine_check: jump measure must not charge the identity");
  LevyKhintchineReport r;
  auto e = poisson(table, nu);
  r.lhs = family.transform(e.measure);
  for (std::size_t j = 0; j < family.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) s += (family.values[j][i] - 1.0) * nu[i];
    r.rhs.push_back(std::exp(s));
    r.max_error = std::max(r.max_error, std::abs(r.lhs[j] - r.rhs.back()));
  }
  return r;
}

namespace {

DiscreteMeasure random_measure(const GridPoints& grid, std::mt19937_64& rng, int atoms, bool probability) {
  std::uniform_int_distribution<std::size_t> pick(0, grid->size() - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DiscreteMeasure m = DiscreteMeasure::zero(grid);
  for (int k = 0; k < atoms; ++k) m.weights()[pick(rng)] += probability ? u(rng) : 2.0 * u(rng) - 1.0;
  if (probability) m *= 1.0 / m.mass();
  return m;
}

double probability_defect(const DiscreteMeasure& m) {
  double neg = 0.0;
  for (double w : m.weights()) neg = std::max(neg, -w);
  return std::max(neg, std::abs(m.mass() - 1.0));
}

}  // namespace

AxiomReport check_fltc_axioms(const ConvolutionTable& table, const TrivializingFamily& family,
                              const SemigroupFn& gamma, const std::vector<double>& times,
                              const TransitionFn& transition, const AxiomOptions& opt) {
  const auto& grid = table.grid();
  const std::size_t g = table.size();
  require(family.size() >= 1, "check_fltc_axioms: empty trivializing family");
  for (const auto& v : family.values) require(v.size() == g, "check_fltc_axioms: family sampled on another grid");
  AxiomReport rep;
  std::mt19937_64 rng(opt.seed);

  // (I) commutativity and identity, row by row
  std::vector<double> dense(g);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = i; j < g; ++j) {
      auto [b1, e1] = table.row(i, j);
      auto [b2, e2] = table.row(j, i);
      std::fill(dense.begin(), dense.end(), 0.0);
      for (const Atom* a = b1; a != e1; ++a) dense[a->index] += a->weight;
      for (const Atom* a = b2; a != e2; ++a) dense[a->index] -= a->weight;
      double tv = 0.0;
      for (double v : dense) tv += std::abs(v);
      rep.commutativity = std::max(rep.commutativity, tv);
    }
    DiscreteMeasure di = DiscreteMeasure::delta(grid, i);
    DiscreteMeasure da = DiscreteMeasure::delta(grid, table.identity());
    rep.identity = std::max({rep.identity, tv_distance(convolve(table, di, da), di),
                             tv_distance(convolve(table, da, di), di)});
  }
  // (II) rows are probability vectors; products of random probabilities stay probabilities
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      auto [b, e] = table.row(i, j);
      double mass = 0.0, neg = 0.0;
      for (const Atom* a = b; a != e; ++a) {
        mass += a->weight;
        neg = std::max(neg, -a->weight);
      }
      rep.probability = std::max({rep.probability, std::abs(mass - 1.0), neg});
    }
  }
  for (int k = 0; k < opt.triples; ++k) {
    auto mu = random_measure(grid, rng, 6, true), nu = random_measure(grid, rng, 6, true);
    rep.probability = std::max(rep.probability, probability_defect(convolve(table, mu, nu)));
  }
  // (I) associativity: half point masses, half random probability measures
  std::uniform_int_distribution<std::size_t> pick(0, g - 1);
  for (int k = 0; k < opt.triples; ++k) {
    DiscreteMeasure a, b, c;
    if (k % 2 == 0) {
      a = DiscreteMeasure::delta(grid, pick(rng));
      b = DiscreteMeasure::delta(grid, pick(rng));
      c = DiscreteMeasure::delta(grid, pick(rng));
    } else {
      a = random_measure(grid, rng, 5, true);
      b = random_measure(grid, rng, 5, true);
      c = random_measure(grid, rng, 5, true);
    }
    double dev = tv_distance(convolve(table, convolve(table, a, b), c), convolve(table, a, convolve(table, b, c)));
    rep.associativity = std::max(rep.associativity, dev);
  }
  // (III) factorisation on random signed measures and the injectivity proxy
  for (int k = 0; k < opt.triples; ++k) {
    auto mu = random_measure(grid, rng, 5, false), nu = random_measure(grid, rng, 5, false);
    auto lhs = family.transform(convolve(table, mu, nu));
    auto tm = family.transform(mu), tn = family.transform(nu);
    for (std::size_t j = 0; j < family.size(); ++j)
      rep.trivialization = std::max(rep.trivialization, std::abs(lhs[j] - tm[j] * tn[j]));
  }
  {
    const std::size_t jn = family.size();
    Eigen::MatrixXd phi(static_cast<Eigen::Index>(jn), static_cast<Eigen::Index>(g));
    for (std::size_t j = 0; j < jn; ++j) {
      for (std::size_t i = 0; i < g; ++i) {
        double w = opt.quadrature_weights.empty() ? 1.0 / g : opt.quadrature_weights.at(i);
        phi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = family.values[j][i] * w;
      }
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(phi);
    auto sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) rank += sv(k) > 1e-10 * sv(0);
    rep.injectivity_rank = rank;
    rep.injectivity_required = static_cast<int>(std::min(jn, g)) - opt.rank_slack;
  }
  // (IV) semigroup and transition representation
  if (gamma) {
    for (double t : times) {
      for (double s : times) {
        if (s < t) continue;
        double dev = tv_distance(gamma(t + s), convolve(table, gamma(t), gamma(s)));
        rep.details.push_back({"semigroup t=" + num(t) + " s=" + num(s), dev});
        rep.semigroup = std::max(rep.semigroup, dev);
      }
    }
    if (transition) {
      std::vector<std::size_t> xs;
      if (g <= 64) {
        for (std::size_t i = 0; i < g; ++i) xs.push_back(i);
      } else {
        xs.push_back(table.identity());
        while (xs.size() < 64) xs.push_back(pick(rng));
      }
      for (double t : times) {
        DiscreteMeasure gt = gamma(t);
        for (std::size_t x : xs) {
          double dev = tv_distance(transition(t, x), convolve(table, gt, DiscreteMeasure::delta(grid, x)));
          rep.transition = std::max(rep.transition, dev);
        }
      }
    }
  }
  rep.details.insert(rep.details.begin(), {{"commutativity", rep.commutativity},
                                           {"associativity", rep.associativity},
                                           {"identity", rep.identity},
                                           {"probability", rep.probability},
                                           {"trivialization", rep.trivialization},
                                           {"semigroup", rep.semigroup},
                                           {"transition", rep.transition}});
  rep.passed = rep.commutativity <= opt.tol && rep.associativity <= opt.tol && rep.identity <= opt.tol &&
               rep.probability <= opt.tol && rep.trivialization <= opt.tol && rep.semigroup <= opt.tol &&
               rep.transition <= opt.tol && rep.injectivity_rank >= rep.injectivity_required;
  return rep;
}

double invariance_check(const ConvolutionTable& table, const DiscreteMeasure& m, const std::vector<std::size_t>& sample) {
  check_same_grid(table.grid(), m.grid(), "invariance_check");
  std::vector<std::size_t> xs = sample;
  if (xs.empty())
    for (std::size_t i = 0; i < table.size(); ++i) xs.push_back(i);
  double worst = 0.0;
  for (std::size_t x : xs) {
    require(x < table.size(), "invariance_check: sample index outside the grid");
    worst = std::max(worst, tv_distance(convolve(table, DiscreteMeasure::delta(table.grid(), x), m), m));
  }
  return worst;
}

DiscreteMeasure heat_row(const NeumannSpectrum& s, const GridPoints& grid, const std::vector<double>& weights,
                         double t, std::size_t x) {
  require(weights.size() == grid->size(), "heat_row: one quadrature weight per grid point");
  require(x < grid->size(), "heat_row: index outside the grid");
  std::vector<double> w(grid->size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = heat_kernel(s, t, (*grid)[x], (*grid)[k]) * weights[k];
  return DiscreteMeasure(grid, std::move(w));
}

}  // namespace fltc
