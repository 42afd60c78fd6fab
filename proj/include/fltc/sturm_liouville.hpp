#pragma once

#include <functional>
#include <string>
#include <vector>

namespace fltc::sl {

using Coefficient = std::function<double(double)>;

// l = -(1/r) d/dx (p d/dx) on [a, b] with Neumann conditions (p w')(a) = (p w')(b) = 0.
struct SLProblem {
  double a = 0.0;
  double b = 1.0;
  Coefficient p;
  Coefficient r;
  Coefficient dp;  // optional; finite differences are used when empty
  Coefficient dr;
  bool smooth = true;  // caller-asserted absolute continuity of p, p', r, r'
  std::string description;

  // Validates positivity and boundedness on 1000 sample points.
  static SLProblem make(double a, double b, Coefficient p, Coefficient r, Coefficient dp = {},
                        Coefficient dr = {}, bool smooth = true);
  static SLProblem cosine(double beta);
  // {"interval": [a, b], "p": coef, "r": coef} where coef is
  // {"kind": "constant", "value": c} | {"kind": "polynomial", "coefficients": [c0, c1, ...]}
  // | {"kind": "jacobi", "alpha": al, "beta": be, "left": l, "right": rr, "scale": s}
  static SLProblem from_json(const std::string& text);

  double dp_at(double x) const;
  double dr_at(double x) const;
};

struct SLSpectrum {
  std::vector<double> lambda;      // ascending, lambda[0] = 0
  std::vector<double> norm_sq;     // ||w_lambda||^2 in L^2(r)
  std::vector<double> rho_weight;  // 1 / norm_sq
  double sup_bound = 1.0;          // uniform bound on |w_lambda| for every lambda >= 0
  double norm_lower = 0.0;         // estimated lower bound on norm_sq beyond the table
  double lambda_constant = 0.0;    // lambda_j >= lambda_constant (j - 1)^2
  std::size_t size() const { return lambda.size(); }
};

struct WValues {
  std::vector<double> w;
  std::vector<double> pw;  // p w'
};

std::vector<double> solve_w(const SLProblem& pr, double lambda, const std::vector<double>& xs,
                            double tol = 1e-10);
WValues solve_w_full(const SLProblem& pr, double lambda, const std::vector<double>& xs,
                     double tol = 1e-10);

// Prufer angle at b (floor(theta / pi) counts the zeros of w_lambda on (a, b]).
double prufer_angle(const SLProblem& pr, double lambda, double tol = 1e-10);
int oscillation_count(const SLProblem& pr, double lambda, double tol = 1e-10);

constexpr int kMaxEigenvalues = 1000;
SLSpectrum neumann_eigenvalues(const SLProblem& pr, int count);

// Bound on the dropped terms of the eigenfunction sum with `power` factors of w.
double tail_bound(const SLProblem& pr, const SLSpectrum& s, double t, int power);

double heat_kernel_sl(const SLProblem& pr, const SLSpectrum& s, double t, double x, double y);
double kernel_q_sl(const SLProblem& pr, const SLSpectrum& s, double t, double x, double y, double xi);

// (l u)(x) from u'(x) and u''(x).
double apply_operator(const SLProblem& pr, double x, double du, double d2u);

struct ProductMeasureResult {
  std::vector<double> grid;
  std::vector<double> weights;
  double t_used = 0.0;
  double residual = 0.0;
  std::vector<double> t_history;
  std::vector<double> residual_history;
  double raw_mass = 0.0;      // total mass before clipping
  double clipped_mass = 0.0;  // negative mass removed by clipping
  double min_weight = 0.0;
  bool positivity_failure = false;
  bool spectrum_limited = false;  // schedule stopped because the tail bound was too large
  double tail_bound = 0.0;
};

// Schedule 0.1 * 2^-i, continued until the diffusion length falls below h / 12.
std::vector<double> default_schedule(const SLProblem& pr, const std::vector<double>& grid);
// Eigenvalue count whose truncation tail at time t is below tol (capped at kMaxEigenvalues).
int required_count(const SLProblem& pr, double t, double tol = 1e-10);

ProductMeasureResult product_measure(const SLProblem& pr, const SLSpectrum& s, double x, double y,
                                     const std::vector<double>& grid,
                                     std::vector<double> t_schedule = {}, int j_check = 10);

}  // namespace fltc::sl
