#pragma once

#include <string>
#include <vector>

namespace fltc::special {

// Integer-order Bessel functions. Validated range: 0 <= m <= 200, 0 <= x <= 1e4.
double bessel_j(int m, double x);
double bessel_y(int m, double x);  // returns -inf at x == 0
double bessel_j_prime(int m, double x);
double bessel_y_prime(int m, double x);

// Second derivatives from the Bessel equation (x > 0).
double bessel_j_second(int m, double x);
double bessel_y_second(int m, double x);

enum class ZeroKind { jprime, annulus_cross };

struct BesselZeroTable {
  ZeroKind kind = ZeroKind::jprime;
  int order = 0;
  double ratio = 0.0;  // only meaningful for annulus_cross
  std::vector<double> zeros;
};

// xi -> J_m'(ratio*xi) Y_m'(xi) - J_m'(xi) Y_m'(ratio*xi)
double annulus_cross(int m, double ratio, double xi);
double annulus_cross_prime(int m, double ratio, double xi);

BesselZeroTable jprime_zeros(int m, int count);
BesselZeroTable annulus_cross_zeros(int m, double ratio, int count);

// Every zero in (0, xmax]; used for exhaustive eigenvalue enumeration.
std::vector<double> jprime_zeros_below(int m, double xmax);
std::vector<double> annulus_cross_zeros_below(int m, double ratio, double xmax);

std::string to_json(const BesselZeroTable& table);
const char* to_string(ZeroKind kind);

}  // namespace fltc::special
