#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "fltc/measure_algebra.hpp"

namespace fltc {

// gamma_t either from heat-kernel rows at the identity or as the Poisson measure e(t nu).
struct SemigroupSpec {
  enum class Kind { heat, poisson };
  Kind kind = Kind::heat;
  SemigroupFn gamma;
  std::optional<DiscreteMeasure> jump;  // nu for the Poisson kind

  static SemigroupSpec heat(std::shared_ptr<const NeumannSpectrum> spectrum, GridPoints grid,
                            std::vector<double> weights, std::size_t identity);
  static SemigroupSpec poisson(std::shared_ptr<const ConvolutionTable> table, DiscreteMeasure nu);
};

// One independent generator per (seed, path) pair.
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path);
double uniform01(std::mt19937_64& rng);

// Cumulative rows of gamma_t * delta_x for a fixed step, built on first use.
class TransitionKernel {
 public:
  TransitionKernel(const ConvolutionTable& table, const SemigroupSpec& spec, double t_step);
  std::size_t sample(std::size_t x, std::mt19937_64& rng);
  const std::vector<double>& cumulative(std::size_t x);
  DiscreteMeasure row(std::size_t x) const;

 private:
  const ConvolutionTable& table_;
  DiscreteMeasure gamma_;
  std::map<std::size_t, std::vector<double>> rows_;
};

std::size_t transition(const ConvolutionTable& table, const SemigroupSpec& spec, double t_step, std::size_t x,
                       std::mt19937_64& rng);

struct PathSample {
  std::vector<double> times;
  std::vector<std::size_t> states;
  std::uint64_t seed = 0;
};

PathSample simulate_path(const ConvolutionTable& table, const SemigroupSpec& spec, double horizon, int n_steps,
                         std::size_t x0, std::uint64_t seed, std::uint64_t path = 0);

// Endpoint histogram of n_paths independent paths.
std::vector<std::uint64_t> simulate_marginal(const ConvolutionTable& table, const SemigroupSpec& spec,
                                             double horizon, int n_steps, std::size_t x0, std::uint64_t seed,
                                             std::uint64_t n_paths);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int bins = 0;
};
// Pearson test of counts against probabilities; adjacent cells are pooled until the
// expected count reaches 5.
ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& counts, const std::vector<double>& probs);

struct MartingaleResult {
  std::size_t j = 0;
  double t = 0.0;
  double psi = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  double target = 0.0;
  bool pass = false;
};

// j is 1-based and j = 1 is the constant function with psi_1 = 0.
// psi_j = -log gamma_1(phi_j) (heat) or ||nu|| - nu(phi_j) (Poisson).
double levy_exponent(const ConvolutionTable& table, const SemigroupSpec& spec, const TrivializingFamily& family,
                     std::size_t j);

// E[exp(psi_j t) phi_j(X_t) | X_0 = x0] against phi_j(x0).
MartingaleResult martingale_check(const ConvolutionTable& table, const SemigroupSpec& spec,
                                  const TrivializingFamily& family, std::size_t j, std::size_t x0, double t,
                                  std::uint64_t n_samples, std::uint64_t seed = 1, int n_steps = 4);

struct CompensatedResult {
  std::size_t j = 0;
  double psi = 0.0;
  std::vector<double> increment_mean;
  std::vector<double> increment_stderr;
  double worst_sigma = 0.0;  // max |mean| / stderr over the increments
  bool pass = false;
};

// phi_j(X_t) - phi_j(X_0) + psi_j sum phi_j(X_{s_i}) (s_{i+1} - s_i) with left-endpoint sums.
CompensatedResult compensated_martingale_check(const ConvolutionTable& table, const SemigroupSpec& spec,
                                               const TrivializingFamily& family, std::size_t j, std::size_t x0,
                                               double step, int n_steps, std::uint64_t n_samples,
                                               std::uint64_t seed = 1);

// (T^nu f)(x) = int f d(nu * delta_x)
std::vector<double> feller_operator(const ConvolutionTable& table, const DiscreteMeasure& nu,
                                    const std::vector<double>& f);

}  // namespace fltc
