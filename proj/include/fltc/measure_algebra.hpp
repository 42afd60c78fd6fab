#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fltc/neumann_spectra.hpp"

namespace fltc {

using GridPoints = std::shared_ptr<const std::vector<Point>>;

GridPoints make_grid_points(std::vector<Point> points);

// Real signed measure with finite support on a fixed grid.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(GridPoints grid, std::vector<double> weights);
  static DiscreteMeasure zero(GridPoints grid);
  static DiscreteMeasure delta(GridPoints grid, std::size_t index);

  const GridPoints& grid() const { return grid_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& weights() { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }

  double total_variation() const;
  double mass() const;
  bool is_probability() const;  // weights >= -1e-12 and mass within 1e-10 of 1
  bool is_positive() const;     // weights >= 0
  double integrate(const std::vector<double>& f) const;

  DiscreteMeasure& operator+=(const DiscreteMeasure& o);
  DiscreteMeasure& operator*=(double c);
  friend DiscreteMeasure operator+(DiscreteMeasure a, const DiscreteMeasure& b) { return a += b; }
  friend DiscreteMeasure operator-(DiscreteMeasure a, const DiscreteMeasure& b) {
    DiscreteMeasure nb = b;
    nb *= -1.0;
    return a += nb;
  }
  friend DiscreteMeasure operator*(double c, DiscreteMeasure a) { return a *= c; }

 private:
  GridPoints grid_;
  std::vector<double> weights_;
};

double tv_distance(const DiscreteMeasure& a, const DiscreteMeasure& b);
void check_same_grid(const GridPoints& a, const GridPoints& b, const char* where);

struct Atom {
  std::uint32_t index;
  double weight;
};

// nu_{x_i, x_j} for every ordered grid pair, stored row by row (row id i * G + j).
class ConvolutionTable {
 public:
  ConvolutionTable(GridPoints grid, std::size_t identity, std::vector<std::size_t> offsets,
                   std::vector<Atom> atoms);
  // rows[i * G + j] lists the atoms of nu_{x_i, x_j}
  static ConvolutionTable from_rows(GridPoints grid, std::size_t identity,
                                    const std::vector<std::vector<Atom>>& rows);

  const GridPoints& grid() const { return grid_; }
  std::size_t size() const { return grid_->size(); }
  std::size_t identity() const { return identity_; }
  std::pair<const Atom*, const Atom*> row(std::size_t i, std::size_t j) const;
  std::size_t atom_count() const { return atoms_.size(); }

  std::string to_json() const;
  static ConvolutionTable from_json(const std::string& text);

 private:
  GridPoints grid_;
  std::size_t identity_;
  std::vector<std::size_t> offsets_;
  std::vector<Atom> atoms_;
};

// Tensor product of the per-axis two-point laws 1/2 (delta_{|x-y|} + delta_{b-|b-x-y|}).
// The table grid is row-major over the axes with the first axis slowest.
ConvolutionTable rectangle_table(const std::vector<double>& betas,
                                 const std::vector<std::vector<double>>& axis_grids);
ConvolutionTable rectangle_table(const std::vector<double>& betas, int n_per_axis);

DiscreteMeasure convolve(const ConvolutionTable& table, const DiscreteMeasure& mu,
                         const DiscreteMeasure& nu);
DiscreteMeasure nfold(const ConvolutionTable& table, const DiscreteMeasure& nu, int n);

struct PoissonResult {
  DiscreteMeasure measure;
  int terms = 0;
  double tail_bound = 0.0;
};
PoissonResult poisson(const ConvolutionTable& table, const DiscreteMeasure& nu);

// values[j][i] = phi_j(x_i); phi_0 is the constant.
struct TrivializingFamily {
  std::vector<std::vector<double>> values;
  std::vector<double> lambdas;
  std::size_t identity = 0;

  std::size_t size() const { return values.size(); }
  std::vector<double> transform(const DiscreteMeasure& mu) const;  // mu(phi_j) for all j
};

// Max-normalised rectangle eigenfunctions sampled on the table grid.
TrivializingFamily rectangle_family(const DomainSpec& d, const std::vector<Point>& grid, int count);

struct LevyKhintchineReport {
  std::vector<double> lhs;  // e(nu)(phi_j)
  std::vector<double> rhs;  // exp(int (phi_j - 1) d nu)
  double max_error = 0.0;
};
LevyKhintchineReport levy_khintchine_check(const ConvolutionTable& table, const TrivializingFamily& family,
                                           const DiscreteMeasure& nu);

struct AxiomOptions {
  int triples = 50;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  int rank_slack = 0;
  std::vector<double> quadrature_weights;  // injectivity proxy; empty selects uniform weights
};

struct AxiomReport {
  double commutativity = 0.0;
  double associativity = 0.0;
  double identity = 0.0;
  double probability = 0.0;       // worst deviation of a row or product from a probability vector
  double trivialization = 0.0;
  int injectivity_rank = 0;
  int injectivity_required = 0;
  double semigroup = 0.0;         // max over (t, s) of ||gamma_{t+s} - gamma_t * gamma_s||
  double transition = 0.0;        // max over (t, x) of ||p_{t,x} - gamma_t * delta_x||
  std::vector<std::pair<std::string, double>> details;
  bool passed = false;
};

using SemigroupFn = std::function<DiscreteMeasure(double)>;
using TransitionFn = std::function<DiscreteMeasure(double, std::size_t)>;

AxiomReport check_fltc_axioms(const ConvolutionTable& table, const TrivializingFamily& family,
                              const SemigroupFn& gamma, const std::vector<double>& times,
                              const TransitionFn& transition, const AxiomOptions& options = {});

// max over sampled x of ||delta_x * m - m||_TV (all grid points when sample is empty)
double invariance_check(const ConvolutionTable& table, const DiscreteMeasure& m,
                        const std::vector<std::size_t>& sample = {});

// Trapezoid weights of the tensor grid used by rectangle_table.
std::vector<double> rectangle_quadrature(const std::vector<double>& betas, int n_per_axis);

// Heat-kernel rows discretised with the grid quadrature: gamma_t = p_{t,x_a} and p_{t,x}.
DiscreteMeasure heat_row(const NeumannSpectrum& s, const GridPoints& grid, const std::vector<double>& weights,
                         double t, std::size_t x);

}  // namespace fltc
