#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace fltc {

enum class ErrorCode {
  invalid_argument = 1,
  domain,             // argument outside the mathematical domain (Bessel Y at x < 0, ...)
  outside_domain,     // evaluation point outside the closed spatial domain
  convergence,        // root bracketing / refinement failed
  tail_unreachable,   // spectral truncation cannot meet the requested tail tolerance
  grid_mismatch,
  grid_not_closed,    // grid not closed under the two-point reflections
  signed_input,
  quadrature,
  integrator,
  io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

// Short %g rendering for diagnostics.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::invalid_argument, what);
}

}  // namespace fltc
