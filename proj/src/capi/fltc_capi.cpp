#include "fltc/fltc.h"

#include <cstring>
#include <memory>
#include <string>

#include "commands.hpp"
#include "fltc/error.hpp"
#include "fltc/measure_algebra.hpp"
#include "fltc/neumann_spectra.hpp"
#include "fltc/special_functions.hpp"

struct fltc_domain {
  fltc::DomainSpec spec;
};
struct fltc_spectrum {
  fltc::NeumannSpectrum spectrum;
};
struct fltc_table {
  fltc::ConvolutionTable table;
};
struct fltc_measure {
  fltc::DiscreteMeasure measure;
};

namespace {

thread_local std::string last_error;

fltc_status status_of(fltc::ErrorCode c) {
  using fltc::ErrorCode;
  switch (c) {
    case ErrorCode::invalid_argument: return FLTC_ERR_INVALID_ARGUMENT;
    case ErrorCode::domain: return FLTC_ERR_DOMAIN;
    case ErrorCode::outside_domain: return FLTC_ERR_OUTSIDE_DOMAIN;
    case ErrorCode::convergence: return FLTC_ERR_CONVERGENCE;
    case ErrorCode::tail_unreachable: return FLTC_ERR_TAIL_UNREACHABLE;
    case ErrorCode::grid_mismatch: return FLTC_ERR_GRID_MISMATCH;
    case ErrorCode::grid_not_closed: return FLTC_ERR_GRID_NOT_CLOSED;
    case ErrorCode::signed_input: return FLTC_ERR_SIGNED_INPUT;
    case ErrorCode::quadrature: return FLTC_ERR_QUADRATURE;
    case ErrorCode::integrator: return FLTC_ERR_INTEGRATOR;
    case ErrorCode::io: return FLTC_ERR_IO;
  }
  return FLTC_ERR_INTERNAL;
}

// Runs f and converts exceptions into status codes.
template <class F>
fltc_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return FLTC_OK;
  } catch (const fltc::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const fltc::capi::ConfigError& e) {
    last_error = e.what();
    return FLTC_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return FLTC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return FLTC_ERR_INTERNAL;
  }
}

fltc_status null_arg(const char* what) {
  last_error = std::string(what) + " must not be NULL";
  return FLTC_ERR_INVALID_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

fltc::Point as_point(const double* p, size_t dim) { return fltc::Point(p, p + dim); }

template <class Make>
fltc_status make_domain(fltc_domain** out, Make&& make) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new fltc_domain{make()}; });
}

}  // namespace

extern "C" {

const char* fltc_last_error(void) { return last_error.c_str(); }

const char* fltc_status_name(fltc_status status) {
  switch (status) {
    case FLTC_OK: return "ok";
    case FLTC_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case FLTC_ERR_DOMAIN: return "domain";
    case FLTC_ERR_OUTSIDE_DOMAIN: return "outside_domain";
    case FLTC_ERR_CONVERGENCE: return "convergence";
    case FLTC_ERR_TAIL_UNREACHABLE: return "tail_unreachable";
    case FLTC_ERR_GRID_MISMATCH: return "grid_mismatch";
    case FLTC_ERR_GRID_NOT_CLOSED: return "grid_not_closed";
    case FLTC_ERR_SIGNED_INPUT: return "signed_input";
    case FLTC_ERR_QUADRATURE: return "quadrature";
    case FLTC_ERR_INTEGRATOR: return "integrator";
    case FLTC_ERR_IO: return "io";
    case FLTC_ERR_CONFIG: return "config";
    case FLTC_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* fltc_version(void) { return "0.1.0"; }

void fltc_string_free(char* s) { delete[] s; }

fltc_status fltc_domain_rectangle(const double* beta, size_t dim, fltc_domain** out) {
  if (!beta) return null_arg("beta");
  return make_domain(out, [&] { return fltc::DomainSpec::rectangle(std::vector<double>(beta, beta + dim)); });
}
fltc_status fltc_domain_disk(double R, fltc_domain** out) {
  return make_domain(out, [&] { return fltc::DomainSpec::disk(R); });
}
fltc_status fltc_domain_sector(int q, double R, fltc_domain** out) {
  return make_domain(out, [&] { return fltc::DomainSpec::sector(q, R); });
}
fltc_status fltc_domain_annulus(double r0, double R, fltc_domain** out) {
  return make_domain(out, [&] { return fltc::DomainSpec::annulus(r0, R); });
}
int fltc_domain_dimension(const fltc_domain* d) { return d ? d->spec.dimension() : 0; }
void fltc_domain_free(fltc_domain* d) { delete d; }

fltc_status fltc_spectrum_compute(const fltc_domain* d, int count, fltc_spectrum** out) {
  if (!d) return null_arg("domain");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new fltc_spectrum{fltc::NeumannSpectrum::compute(d->spec, count)}; });
}

fltc_status fltc_spectrum_for_time(const fltc_domain* d, double t, double tol, int power, fltc_spectrum** out) {
  if (!d) return null_arg("domain");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new fltc_spectrum{fltc::NeumannSpectrum::for_time(d->spec, t, tol, power)}; });
}

size_t fltc_spectrum_size(const fltc_spectrum* s) { return s ? s->spectrum.size() : 0; }

fltc_status fltc_spectrum_lambda(const fltc_spectrum* s, size_t j, double* out) {
  if (!s) return null_arg("spectrum");
  if (!out) return null_arg("out");
  return guarded([&] {
    fltc::require(j < s->spectrum.size(), "eigenpair index out of range");
    *out = s->spectrum.pairs()[j].lambda;
  });
}

fltc_status fltc_spectrum_eval(const fltc_spectrum* s, size_t j, const double* point, size_t dim, double* out) {
  if (!s) return null_arg("spectrum");
  if (!point || !out) return null_arg("point/out");
  return guarded([&] {
    fltc::require(j < s->spectrum.size(), "eigenpair index out of range");
    *out = fltc::eval(s->spectrum.pairs()[j], s->spectrum.domain(), as_point(point, dim));
  });
}

fltc_status fltc_heat_kernel(const fltc_spectrum* s, double t, const double* x, const double* y, size_t dim,
                             double* out) {
  if (!s) return null_arg("spectrum");
  if (!x || !y || !out) return null_arg("x/y/out");
  return guarded([&] { *out = fltc::heat_kernel(s->spectrum, t, as_point(x, dim), as_point(y, dim)); });
}

fltc_status fltc_kernel_q(const fltc_spectrum* s, double t, const double* x, const double* y, const double* xi,
                          size_t dim, double* out) {
  if (!s) return null_arg("spectrum");
  if (!x || !y || !xi || !out) return null_arg("x/y/xi/out");
  return guarded(
      [&] { *out = fltc::kernel_q(s->spectrum, t, as_point(x, dim), as_point(y, dim), as_point(xi, dim)); });
}

void fltc_spectrum_free(fltc_spectrum* s) { delete s; }

fltc_status fltc_bessel_j(int m, double x, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = fltc::special::bessel_j(m, x); });
}

fltc_status fltc_bessel_y(int m, double x, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = fltc::special::bessel_y(m, x); });
}

fltc_status fltc_jprime_zeros(int m, int count, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    auto t = fltc::special::jprime_zeros(m, count);
    std::copy(t.zeros.begin(), t.zeros.end(), out);
  });
}

fltc_status fltc_annulus_cross_zeros(int m, double ratio, int count, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    auto t = fltc::special::annulus_cross_zeros(m, ratio, count);
    std::copy(t.zeros.begin(), t.zeros.end(), out);
  });
}

fltc_status fltc_table_rectangle(const double* beta, size_t dim, int n, fltc_table** out) {
  if (!beta) return null_arg("beta");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new fltc_table{fltc::rectangle_table(std::vector<double>(beta, beta + dim), n)}; });
}

fltc_status fltc_table_from_json(const char* json, fltc_table** out) {
  if (!json) return null_arg("json");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new fltc_table{fltc::ConvolutionTable::from_json(json)}; });
}

fltc_status fltc_table_to_json(const fltc_table* t, char** out) {
  if (!t) return null_arg("table");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = copy_string(t->table.to_json()); });
}

size_t fltc_table_size(const fltc_table* t) { return t ? t->table.size() : 0; }
size_t fltc_table_identity(const fltc_table* t) { return t ? t->table.identity() : 0; }
void fltc_table_free(fltc_table* t) { delete t; }

fltc_status fltc_measure_create(const fltc_table* t, const double* weights, size_t n, fltc_measure** out) {
  if (!t) return null_arg("table");
  if (!weights || !out) return null_arg("weights/out");
  *out = nullptr;
  return guarded([&] {
    fltc::require(n == t->table.size(), "weight count does not match the table grid");
    *out = new fltc_measure{fltc::DiscreteMeasure(t->table.grid(), std::vector<double>(weights, weights + n))};
  });
}

fltc_status fltc_measure_delta(const fltc_table* t, size_t index, fltc_measure** out) {
  if (!t) return null_arg("table");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    fltc::require(index < t->table.size(), "delta index outside the grid");
    *out = new fltc_measure{fltc::DiscreteMeasure::delta(t->table.grid(), index)};
  });
}

size_t fltc_measure_size(const fltc_measure* m) { return m ? m->measure.size() : 0; }

fltc_status fltc_measure_weights(const fltc_measure* m, double* out, size_t n) {
  if (!m) return null_arg("measure");
  if (!out) return null_arg("out");
  return guarded([&] {
    fltc::require(n >= m->measure.size(), "output buffer too small");
    std::copy(m->measure.weights().begin(), m->measure.weights().end(), out);
  });
}

void fltc_measure_free(fltc_measure* m) { delete m; }

fltc_status fltc_convolve(const fltc_table* t, const fltc_measure* a, const fltc_measure* b, fltc_measure** out) {
  if (!t || !a || !b) return null_arg("table/a/b");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new fltc_measure{fltc::convolve(t->table, a->measure, b->measure)}; });
}

fltc_status fltc_poisson(const fltc_table* t, const fltc_measure* nu, fltc_measure** out) {
  if (!t || !nu) return null_arg("table/nu");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new fltc_measure{fltc::poisson(t->table, nu->measure).measure}; });
}

fltc_status fltc_run(const char* command, const char* config_json, char** result) {
  if (!command) return null_arg("command");
  if (!result) return null_arg("result");
  *result = nullptr;
  return guarded([&] {
    *result = copy_string(fltc::capi::run_command(command, config_json ? config_json : ""));
  });
}

}  // extern "C"
