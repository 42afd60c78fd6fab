#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fltc {

using Point = std::vector<double>;

struct Rectangle {
  std::vector<double> beta;
};
struct Disk {
  double R = 1.0;
};
struct Sector {
  int q = 1;
  double R = 1.0;
};
struct Annulus {
  double r0 = 0.5;
  double R = 1.0;
};

class DomainSpec {
 public:
  using Shape = std::variant<Rectangle, Disk, Sector, Annulus>;

  static DomainSpec rectangle(std::vector<double> beta);
  static DomainSpec disk(double R);
  static DomainSpec sector(int q, double R);
  static DomainSpec annulus(double r0, double R);

  const Shape& shape() const { return shape_; }
  bool is_rectangle() const { return std::holds_alternative<Rectangle>(shape_); }
  bool is_polar() const { return !is_rectangle(); }
  std::string kind() const;
  int dimension() const;
  double volume() const;
  double perimeter() const;  // boundary measure (d = 2), sum of face areas otherwise

  // Polar helpers (undefined for rectangles).
  double inner_radius() const;
  double outer_radius() const;
  double angle_span() const;

  bool contains(const Point& p, double slack = 1e-12) const;
  Point project(const Point& p) const;

 private:
  explicit DomainSpec(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

enum class Normalization { orthonormal, max_normalized };
enum class Parity { none, cosine, sine };

const char* to_string(Normalization n);

struct EigenPair {
  double lambda = 0.0;
  // rectangle: (j_1..j_d); disk and annulus: (m, k, parity) with parity 0 = cos, 1 = sin;
  // sector: (m, k). The constant function has k = 0.
  std::vector<int> index;
  double l2_norm_sq = 1.0;
  Normalization normalization = Normalization::orthonormal;

  // Closed-form data for polar domains. The radial factor is
  //   u(r) = coef_j * J_order(root r / R) + coef_y * Y_order(root r / R)
  // and the angular factor cos or sin of angular * (theta - angle_offset).
  double root = 0.0;
  int order = 0;
  int angular = 0;
  Parity parity = Parity::none;
  double angle_offset = 0.0;
  double coef_j = 1.0;
  double coef_y = 0.0;
  double scale = 1.0;

  double sup_value = 1.0;     // max |phi| on the radial sample grid
  double sup_bound = 1.0;     // sup_value plus Lipschitz slack
  double radial_argmax = 0.0; // radius where |u| peaks (polar)

  bool is_constant() const { return lambda == 0.0; }
};

std::string index_string(const EigenPair& e);

// All pairs with lambda <= lambda_max, sorted.
std::vector<EigenPair> eigenpairs_below(const DomainSpec& d, double lambda_max);
// The `count` smallest eigenvalues; the last multiplicity class is completed.
std::vector<EigenPair> eigenpairs(const DomainSpec& d, int count);

// Multiplicity of each pair's eigenvalue inside the list (relative tie tolerance 1e-10).
std::vector<int> multiplicities(const std::vector<EigenPair>& pairs);

double eval(const EigenPair& e, const DomainSpec& d, const Point& p);
Point eval_gradient(const EigenPair& e, const DomainSpec& d, const Point& p);
// Same as eval without the containment check.
double eval_unchecked(const EigenPair& e, const DomainSpec& d, const Point& p);
Point gradient_unchecked(const EigenPair& e, const DomainSpec& d, const Point& p);

// Radial factor u(r) (without scale) and its derivative, polar domains only.
double radial_value(const EigenPair& e, const DomainSpec& d, double r);
double radial_derivative(const EigenPair& e, const DomainSpec& d, double r);

struct Grid {
  std::vector<Point> points;  // Cartesian coordinates
  std::vector<Point> chart;   // rectangle: same as points; polar: (r, theta)
  std::vector<int> shape;     // samples per chart axis
  std::vector<double> spacing;
  bool polar = false;

  std::size_t size() const { return points.size(); }
  // Tensor grid in the domain's natural chart with n samples per axis. Polar
  // grids use `angular` angle samples (0 selects 8(n - 1) on full circles);
  // the centre of a disk or sector is stored once.
  static Grid natural(const DomainSpec& d, int n, int angular = 0);
};

class NeumannSpectrum {
 public:
  NeumannSpectrum(DomainSpec d, std::vector<EigenPair> pairs);
  static NeumannSpectrum compute(const DomainSpec& d, int count);
  // Smallest spectrum (count <= max_count) whose truncation tail at time t is below tol.
  static NeumannSpectrum for_time(const DomainSpec& d, double t, double tol, int power,
                                  int max_count = 2000);

  const DomainSpec& domain() const { return domain_; }
  const std::vector<EigenPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }

  // Bound on the terms dropped when only the first `used` pairs are summed.
  // power 2: heat kernel, power 3: the triple kernel q_t.
  double tail_bound(double t, int power, std::size_t used) const;
  double tail_bound(double t, int power) const { return tail_bound(t, power, pairs_.size()); }

  // Factor applied to phi_j inside q_t: 1 for rectangles (already max-normalized)
  // and 1/sup for curved domains.
  double kernel_scale(std::size_t j) const;

 private:
  DomainSpec domain_;
  std::vector<EigenPair> pairs_;
};

double heat_kernel(const NeumannSpectrum& s, double t, const Point& x, const Point& y,
                   double tail_tol = 1e-9);
double kernel_q(const NeumannSpectrum& s, double t, const Point& x, const Point& y,
                const Point& xi, double tail_tol = 1e-9);

struct PositivityScan {
  double min_value = 0.0;
  std::array<std::size_t, 3> argmin{};
  double tail_bound = 0.0;
  std::size_t pairs_used = 0;
  std::size_t triples = 0;
};

// Exact minimum of the truncated q_t over grid^3 (uses the x <-> y symmetry).
PositivityScan positivity_scan(const NeumannSpectrum& s, double t, const Grid& grid);

struct MaximizerSet {
  std::vector<std::size_t> grid_indices;
  std::vector<Point> refined;
  double max_abs = 0.0;
};

MaximizerSet locate_maximizers(const EigenPair& e, const DomainSpec& d, const Grid& grid,
                               double tol);

struct BasisCheck {
  std::string basis;
  double rotation = 0.0;  // eigenspace rotation angle applied to every m >= 1 pair
  bool exists = true;
  std::vector<std::size_t> candidates;  // final intersection, or the last non-empty one
  std::optional<std::size_t> witness;   // first pair that empties the intersection
  std::optional<std::array<std::size_t, 2>> disjoint_pair;
};

struct PairSummary {
  std::size_t position = 0;
  std::vector<int> index;
  double lambda = 0.0;
  std::size_t maximizer_count = 0;
  double min_radius = 0.0;  // polar: radii spanned by the maximizer set
  double max_radius = 0.0;
  std::optional<double> predicted_radius;  // disk and sector radial law
};

struct ClassCheck {
  bool exists = true;
  std::optional<std::size_t> witness;  // position of the first pair of the emptying class
  std::vector<std::size_t> candidates;
};

struct CommonMaximizerReport {
  bool exists = true;
  std::vector<Point> candidates;
  std::optional<std::size_t> witness;
  std::optional<std::array<std::size_t, 2>> disjoint_pair;
  std::vector<BasisCheck> bases;
  std::optional<ClassCheck> eigenspace;  // polar domains
  std::vector<PairSummary> pairs;
  std::vector<EigenPair> eigenpairs;
  double grid_cell = 0.0;
};

CommonMaximizerReport common_maximizer_check(const DomainSpec& d, int count, double tol,
                                             int grid_n = 41);

struct TestFunction {
  std::string name;
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> gradient;
};

struct GradientExpansionRow {
  int count = 0;
  std::size_t pairs_used = 0;
  double max_value_error = 0.0;
  double max_gradient_error = 0.0;
  Point probe_gradient;
};

struct GradientExpansionReport {
  std::vector<GradientExpansionRow> rows;
  Point probe;
  Point probe_exact_gradient;
  bool value_monotone = true;
  bool gradient_monotone = true;
  int quadrature_nodes = 0;
  std::vector<double> coefficients;  // <h, omega_j> for the largest count
};

// Rectangle only. Coefficients by tensor trapezoid quadrature with a
// node-halving convergence check; errors sampled on a sample_n^d grid.
GradientExpansionReport gradient_expansion_check(const DomainSpec& d, const TestFunction& h,
                                                 const std::vector<int>& counts,
                                                 int sample_n = 101);

// Test functions for the expansion experiment.
TestFunction eigen_combination(const DomainSpec& d, const std::vector<EigenPair>& pairs,
                               const std::vector<std::pair<std::size_t, double>>& terms);
TestFunction smooth_bump(const Point& centre, double radius, double amplitude = 1.0);

}  // namespace fltc
