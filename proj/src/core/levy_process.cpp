#include "fltc/levy_process.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "fltc/error.hpp"

namespace fltc {

SemigroupSpec SemigroupSpec::heat(std::shared_ptr<const NeumannSpectrum> spectrum, GridPoints grid,
                                  std::vector<double> weights, std::size_t identity) {
  require(spectrum != nullptr, "SemigroupSpec::heat: null spectrum");
  require(weights.size() == grid->size(), "SemigroupSpec::heat: one weight per grid point");
  SemigroupSpec s;
  s.kind = Kind::heat;
  s.gamma = [spectrum, grid, weights = std::move(weights), identity](double t) {
    if (t == 0.0) return DiscreteMeasure::delta(grid, identity);
    return heat_row(*spectrum, grid, weights, t, identity);
  };
  return s;
}

SemigroupSpec SemigroupSpec::poisson(std::shared_ptr<const ConvolutionTable> table, DiscreteMeasure nu) {
  require(table != nullptr, "SemigroupSpec::poisson: null table");
  check_same_grid(table->grid(), nu.grid(), "SemigroupSpec::poisson");
  SemigroupSpec s;
  s.kind = Kind::poisson;
  s.jump = nu;
  s.gamma = [table, nu](double t) {
    DiscreteMeasure scaled = nu;
    scaled *= t;
    return fltc::poisson(*table, scaled).measure;
  };
  return s;
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

TransitionKernel::TransitionKernel(const ConvolutionTable& table, const SemigroupSpec& spec, double t_step)
    : table_(table) {
  require(t_step > 0.0, "transition: t_step must be positive");
  require(static_cast<bool>(spec.gamma), "transition: semigroup without gamma");
  gamma_ = spec.gamma(t_step);
  check_same_grid(table.grid(), gamma_.grid(), "transition");
}

DiscreteMeasure TransitionKernel::row(std::size_t x) const {
  return convolve(table_, gamma_, DiscreteMeasure::delta(table_.grid(), x));
}

const std::vector<double>& TransitionKernel::cumulative(std::size_t x) {
  require(x < table_.size(), "transition: state outside the grid");
  auto it = rows_.find(x);
  if (it != rows_.end()) return it->second;
  DiscreteMeasure r = row(x);
  std::vector<double> c(r.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < -1e-9) {
      fail(ErrorCode::signed_input, "transition: row of state " + num(x) + " has negative weight " +
                                        num(r[i]) + " (positivity finding)");
    }
    acc += std::max(0.0, r[i]);
    c[i] = acc;
  }
  if (!(std::abs(acc - 1.0) < 1e-6)) {
    fail(ErrorCode::signed_input, "transition: row of state " + num(x) + " has mass " + num(acc));
  }
  return rows_.emplace(x, std::move(c)).first->second;
}

std::size_t TransitionKernel::sample(std::size_t x, std::mt19937_64& rng) {
  const auto& c = cumulative(x);
  const double u = uniform01(rng) * c.back();
  auto it = std::upper_bound(c.begin(), c.end(), u);
  std::size_t k = static_cast<std::size_t>(it - c.begin());
  return std::min(k, c.size() - 1);
}

std::size_t transition(const ConvolutionTable& table, const SemigroupSpec& spec, double t_step, std::size_t x,
                       std::mt19937_64& rng) {
  TransitionKernel k(table, spec, t_step);
  return k.sample(x, rng);
}

namespace {

PathSample run_path(TransitionKernel* kernel, double horizon, int n_steps, std::size_t x0, std::uint64_t seed,
                    std::uint64_t path) {
  PathSample p;
  p.seed = seed;
  auto rng = path_rng(seed, path);
  std::size_t x = x0;
  for (int i = 0; i <= n_steps; ++i) {
    p.times.push_back(horizon * i / n_steps);
    if (i > 0 && kernel) x = kernel->sample(x, rng);
    p.states.push_back(x);
  }
  return p;
}

}  // namespace

PathSample simulate_path(const ConvolutionTable& table, const SemigroupSpec& spec, double horizon, int n_steps,
                         std::size_t x0, std::uint64_t seed, std::uint64_t path) {
  require(n_steps >= 1, "simulate_path: n_steps must be at least 1");
  require(horizon >= 0.0, "simulate_path: horizon must be non-negative");
  require(x0 < table.size(), "simulate_path: start outside the grid");
  if (horizon == 0.0) return run_path(nullptr, 0.0, n_steps, x0, seed, path);
  TransitionKernel k(table, spec, horizon / n_steps);
  return run_path(&k, horizon, n_steps, x0, seed, path);
}

std::vector<std::uint64_t> simulate_marginal(const ConvolutionTable& table, const SemigroupSpec& spec,
                                             double horizon, int n_steps, std::size_t x0, std::uint64_t seed,
                                             std::uint64_t n_paths) {
  require(n_steps >= 1 && horizon > 0.0, "simulate_marginal: need a positive horizon and n_steps >= 1");
  require(x0 < table.size(), "simulate_marginal: start outside the grid");
  TransitionKernel k(table, spec, horizon / n_steps);
  std::vector<std::uint64_t> counts(table.size(), 0);
  for (std::uint64_t p = 0; p < n_paths; ++p) {
    auto rng = path_rng(seed, p);
    std::size_t x = x0;
    for (int i = 0; i < n_steps; ++i) x = k.sample(x, rng);
    ++counts[x];
  }
  return counts;
}

ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& counts, const std::vector<double>& probs) {
  require(counts.size() == probs.size() && !counts.empty(), "chi_square_gof: counts and probabilities differ in length");
  double n = 0.0, ptotal = 0.0;
  for (auto c : counts) n += static_cast<double>(c);
  for (double p : probs) ptotal += std::max(0.0, p);
  require(n > 0.0 && ptotal > 0.0, "chi_square_gof: empty sample");
  std::vector<double> obs, expct;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    o += static_cast<double>(counts[i]);
    e += n * std::max(0.0, probs[i]) / ptotal;
    if (e >= 5.0) {
      obs.push_back(o);
      expct.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (expct.empty()) {
      obs.push_back(o);
      expct.push_back(e);
    } else {
      obs.back() += o;
      expct.back() += e;
    }
  }
  ChiSquareResult r;
  r.bins = static_cast<int>(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) r.statistic += (obs[i] - expct[i]) * (obs[i] - expct[i]) / expct[i];
  r.dof = r.bins - 1;
  if (r.dof >= 1) {
    boost::math::chi_squared dist(r.dof);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  }
  return r;
}

double levy_exponent(const ConvolutionTable& table, const SemigroupSpec& spec, const TrivializingFamily& family,
                     std::size_t j) {
  require(j >= 1 && j <= family.size(), "levy_exponent: j must lie in [1, J]");
  if (j == 1) return 0.0;
  const auto& phi = family.values[j - 1];
  if (spec.kind == SemigroupSpec::Kind::poisson) {
    const auto& nu = *spec.jump;
    check_same_grid(table.grid(), nu.grid(), "levy_exponent");
    return nu.mass() - nu.integrate(phi);
  }
  // gamma_1(phi_j) = gamma_s(phi_j)^(1/s); halve s until the value clears rounding noise
  double s = 1.0, g = spec.gamma(s).integrate(phi);
  while (g < 1e-3 && s > 1.0 / 64.0) {
    s *= 0.5;
    g = spec.gamma(s).integrate(phi);
  }
  if (!(g > 0.0)) fail(ErrorCode::convergence, "levy_exponent: gamma_s(phi_j) is not positive");
  return -std::log(g) / s;
}

MartingaleResult martingale_check(const ConvolutionTable& table, const SemigroupSpec& spec,
                                  const TrivializingFamily& family, std::size_t j, std::size_t x0, double t,
                                  std::uint64_t n_samples, std::uint64_t seed, int n_steps) {
  require(n_samples >= 2, "martingale_check: need at least two samples");
  require(t > 0.0 && n_steps >= 1, "martingale_check: need t > 0 and n_steps >= 1");
  require(x0 < table.size(), "martingale_check: start outside the grid");
  MartingaleResult r;
  r.j = j;
  r.t = t;
  r.psi = levy_exponent(table, spec, family, j);
  const auto& phi = family.values[j - 1];
  r.target = phi[x0];
  TransitionKernel k(table, spec, t / n_steps);
  const double factor = std::exp(r.psi * t);
  double sum = 0.0, sum2 = 0.0;
  for (std::uint64_t p = 0; p < n_samples; ++p) {
    auto rng = path_rng(seed, p);
    std::size_t x = x0;
    for (int i = 0; i < n_steps; ++i) x = k.sample(x, rng);
    double v = factor * phi[x];
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(n_samples);
  r.estimate = sum / n;
  const double var = std::max(0.0, (sum2 - n * r.estimate * r.estimate) / (n - 1.0));
  r.stderr_ = std::sqrt(var / n);
  r.pass = r.stderr_ > 0.0 ? std::abs(r.estimate - r.target) < 4.0 * r.stderr_
                           : std::abs(r.estimate - r.target) <= 1e-12;
  return r;
}

CompensatedResult compensated_martingale_check(const ConvolutionTable& table, const SemigroupSpec& spec,
                                               const TrivializingFamily& family, std::size_t j, std::size_t x0,
                                               double step, int n_steps, std::uint64_t n_samples,
                                               std::uint64_t seed) {
  require(step > 0.0 && n_steps >= 1 && n_samples >= 2, "compensated_martingale_check: bad parameters");
  require(x0 < table.size(), "compensated_martingale_check: start outside the grid");
  CompensatedResult r;
  r.j = j;
  r.psi = levy_exponent(table, spec, family, j);
  const auto& phi = family.values[j - 1];
  TransitionKernel k(table, spec, step);
  std::vector<double> s1(n_steps, 0.0), s2(n_steps, 0.0);
  for (std::uint64_t p = 0; p < n_samples; ++p) {
    auto rng = path_rng(seed, p);
    std::size_t x = x0;
    for (int i = 0; i < n_steps; ++i) {
      std::size_t y = k.sample(x, rng);
      double inc = phi[y] - phi[x] + r.psi * phi[x] * step;
      s1[i] += inc;
      s2[i] += inc * inc;
      x = y;
    }
  }
  const double n = static_cast<double>(n_samples);
  r.pass = true;
  for (int i = 0; i < n_steps; ++i) {
    double mean = s1[i] / n;
    double var = std::max(0.0, (s2[i] - n * mean * mean) / (n - 1.0));
    double se = std::sqrt(var / n);
    r.increment_mean.push_back(mean);
    r.increment_stderr.push_back(se);
    double sig = se > 0.0 ? std::abs(mean) / se : (std::abs(mean) <= 1e-12 ? 0.0 : INFINITY);
    r.worst_sigma = std::max(r.worst_sigma, sig);
  }
  r.pass = r.worst_sigma < 4.0;
  return r;
}

std::vector<double> feller_operator(const ConvolutionTable& table, const DiscreteMeasure& nu,
                                    const std::vector<double>& f) {
  check_same_grid(table.grid(), nu.grid(), "feller_operator");
  if (f.size() != table.size()) fail(ErrorCode::grid_mismatch, "feller_operator: function has the wrong length");
  std::vector<double> out(table.size(), 0.0);
  for (std::size_t x = 0; x < table.size(); ++x) {
    double s = 0.0;
    for (std::size_t y = 0; y < table.size(); ++y) {
      if (nu[y] == 0.0) continue;
      auto [b, e] = table.row(y, x);
      double inner = 0.0;
      for (const Atom* a = b; a != e; ++a) inner += a->weight * f[a->index];
      s += nu[y] * inner;
    }
    out[x] = s;
  }
  return out;
}

}  // namespace fltc
