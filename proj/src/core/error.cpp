#include "fltc/error.hpp"

namespace fltc {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::domain: return "domain-error";
    case ErrorCode::outside_domain: return "point-outside-domain";
    case ErrorCode::convergence: return "convergence-failure";
    case ErrorCode::tail_unreachable: return "tail-tolerance-unreachable";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::grid_not_closed: return "grid-not-closed-under-reflection";
    case ErrorCode::signed_input: return "signed-input";
    case ErrorCode::quadrature: return "quadrature-nonconvergence";
    case ErrorCode::integrator: return "integrator-step-failure";
    case ErrorCode::io: return "io-error";
  }
  return "unknown";
}

}  // namespace fltc
