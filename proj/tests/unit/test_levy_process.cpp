#include <doctest.h>

#include <cmath>

#include "fltc/levy_process.hpp"

using namespace fltc;

namespace {

struct Cosine {
  std::shared_ptr<ConvolutionTable> table = std::make_shared<ConvolutionTable>(rectangle_table({1.0}, 21));
  DomainSpec d = DomainSpec::rectangle({1.0});
  std::vector<double> w = rectangle_quadrature({1.0}, 21);
  std::shared_ptr<NeumannSpectrum> s =
      std::make_shared<NeumannSpectrum>(NeumannSpectrum::for_time(d, 0.01, 1e-9, 2));
  TrivializingFamily fam = rectangle_family(d, *table->grid(), 8);
  SemigroupSpec heat = SemigroupSpec::heat(s, table->grid(), w, 0);
};

}  // namespace

TEST_CASE("zero jump measure never moves") {
  Cosine c;
  auto spec = SemigroupSpec::poisson(c.table, DiscreteMeasure::zero(c.table->grid()));
  auto rng = path_rng(1, 0);
  for (std::size_t x = 0; x < c.table->size(); ++x) CHECK(transition(*c.table, spec, 0.3, x, rng) == x);
}

TEST_CASE("sampling from the identity reproduces gamma_t") {
  Cosine c;
  auto counts = simulate_marginal(*c.table, c.heat, 0.05, 1, 0, 11, 100000);
  auto chi = chi_square_gof(counts, c.heat.gamma(0.05).weights());
  CHECK(chi.p_value > 0.01);
  CHECK(chi.dof > 3);
}

TEST_CASE("two half steps equal one full step at table level") {
  Cosine c;
  TransitionKernel half(*c.table, c.heat, 0.05), full(*c.table, c.heat, 0.1);
  for (std::size_t x : {0u, 4u, 13u, 20u}) {
    auto two = convolve(*c.table, c.heat.gamma(0.05), half.row(x));
    CHECK(tv_distance(two, full.row(x)) < 1e-6);
  }
}

TEST_CASE("paths are deterministic per seed and constant at zero horizon") {
  Cosine c;
  auto a = simulate_path(*c.table, c.heat, 0.5, 20, 7, 42);
  auto b = simulate_path(*c.table, c.heat, 0.5, 20, 7, 42);
  auto other = simulate_path(*c.table, c.heat, 0.5, 20, 7, 43);
  CHECK(a.states == b.states);
  CHECK(a.states != other.states);
  auto still = simulate_path(*c.table, c.heat, 0.0, 5, 7, 42);
  for (auto s : still.states) CHECK(s == 7);
  for (auto s : a.states) CHECK(s < c.table->size());
}

TEST_CASE("eigenfunction martingales") {
  Cosine c;
  auto one = martingale_check(*c.table, c.heat, c.fam, 1, 5, 0.3, 10000);
  CHECK(one.estimate == 1.0);
  CHECK(one.stderr_ == 0.0);
  CHECK(one.pass);
  auto two = martingale_check(*c.table, c.heat, c.fam, 2, 5, 0.3, 20000, 9);
  CHECK(two.target == doctest::Approx(std::cos(M_PI * 0.25)).epsilon(1e-14));
  CHECK(two.psi == doctest::Approx(M_PI * M_PI).epsilon(1e-8));
  CHECK(two.pass);

  auto nu = DiscreteMeasure::zero(c.table->grid());
  nu.weights()[8] = 2.0;
  auto pspec = SemigroupSpec::poisson(c.table, nu);
  for (std::size_t j = 2; j <= 4; ++j) {
    double psi = levy_exponent(*c.table, pspec, c.fam, j);
    double from_gamma = -std::log(pspec.gamma(1.0).integrate(c.fam.values[j - 1]));
    CHECK(psi == doctest::Approx(from_gamma).epsilon(1e-9));
    CHECK(martingale_check(*c.table, pspec, c.fam, j, 3, 0.4, 20000, 5).pass);
  }
  // the left-endpoint sum is biased by O(psi_j step), so the step shrinks with the eigenvalue
  auto fine = std::make_shared<NeumannSpectrum>(NeumannSpectrum::for_time(c.d, 0.002, 1e-9, 2));
  auto heat_fine = SemigroupSpec::heat(fine, c.table->grid(), c.w, 0);
  for (std::size_t j = 1; j <= 4; ++j) {
    auto r = compensated_martingale_check(*c.table, heat_fine, c.fam, j, 5, 0.002, 20, 20000, 3);
    CHECK_MESSAGE(r.pass, "j=" << j << " worst sigma " << r.worst_sigma);
  }
}

TEST_CASE("Feller operator properties") {
  Cosine c;
  auto g = c.heat.gamma(0.1);
  std::vector<double> ones(c.table->size(), 1.0);
  for (double v : feller_operator(*c.table, g, ones)) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t j = 1; j < 5; ++j) {
    auto out = feller_operator(*c.table, g, c.fam.values[j]);
    for (std::size_t i = 0; i < out.size(); ++i)
      CHECK(std::abs(out[i] - std::exp(-c.fam.lambdas[j] * 0.1) * c.fam.values[j][i]) < 1e-9);
  }
  std::mt19937_64 rng(3);
  std::vector<double> f(c.table->size());
  for (double& v : f) v = uniform01(rng) * 2 - 1;
  double fmax = 0.0, tmax = 0.0;
  for (double v : f) fmax = std::max(fmax, std::abs(v));
  for (double v : feller_operator(*c.table, g, f)) tmax = std::max(tmax, std::abs(v));
  CHECK(tmax <= fmax + 1e-15);
  // Chapman-Kolmogorov
  auto a = feller_operator(*c.table, c.heat.gamma(0.05), feller_operator(*c.table, c.heat.gamma(0.07), f));
  auto b = feller_operator(*c.table, c.heat.gamma(0.12), f);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-8);
}

TEST_CASE("chi-square pooling") {
  std::vector<std::uint64_t> counts{50, 50, 1, 0, 0};
  std::vector<double> probs{0.5, 0.49, 0.005, 0.003, 0.002};
  auto r = chi_square_gof(counts, probs);
  CHECK(r.bins == 2);
  CHECK(r.dof == 1);
  CHECK(r.p_value > 0.5);
}
