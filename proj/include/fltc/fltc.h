#ifndef FLTC_H
#define FLTC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define FLTC_API __declspec(dllexport)
#else
#define FLTC_API __attribute__((visibility("default")))
#endif

typedef enum fltc_status {
  FLTC_OK = 0,
  FLTC_ERR_INVALID_ARGUMENT = 1,
  FLTC_ERR_DOMAIN = 2,
  FLTC_ERR_OUTSIDE_DOMAIN = 3,
  FLTC_ERR_CONVERGENCE = 4,
  FLTC_ERR_TAIL_UNREACHABLE = 5,
  FLTC_ERR_GRID_MISMATCH = 6,
  FLTC_ERR_GRID_NOT_CLOSED = 7,
  FLTC_ERR_SIGNED_INPUT = 8,
  FLTC_ERR_QUADRATURE = 9,
  FLTC_ERR_INTEGRATOR = 10,
  FLTC_ERR_IO = 11,
  FLTC_ERR_CONFIG = 12,
  FLTC_ERR_INTERNAL = 13
} fltc_status;

typedef struct fltc_domain fltc_domain;
typedef struct fltc_spectrum fltc_spectrum;
typedef struct fltc_table fltc_table;
typedef struct fltc_measure fltc_measure;

/* Message of the last failing call on the calling thread; never NULL. */
FLTC_API const char* fltc_last_error(void);
FLTC_API const char* fltc_status_name(fltc_status status);
FLTC_API const char* fltc_version(void);

/* Releases strings returned through char** out-parameters. */
FLTC_API void fltc_string_free(char* s);

/* Domains. */
FLTC_API fltc_status fltc_domain_rectangle(const double* beta, size_t dim, fltc_domain** out);
FLTC_API fltc_status fltc_domain_disk(double R, fltc_domain** out);
FLTC_API fltc_status fltc_domain_sector(int q, double R, fltc_domain** out);
FLTC_API fltc_status fltc_domain_annulus(double r0, double R, fltc_domain** out);
FLTC_API int fltc_domain_dimension(const fltc_domain* d);
FLTC_API void fltc_domain_free(fltc_domain* d);

/* Neumann spectra, indexed from 0 in ascending eigenvalue order. */
FLTC_API fltc_status fltc_spectrum_compute(const fltc_domain* d, int count, fltc_spectrum** out);
FLTC_API fltc_status fltc_spectrum_for_time(const fltc_domain* d, double t, double tol, int power,
                                            fltc_spectrum** out);
FLTC_API size_t fltc_spectrum_size(const fltc_spectrum* s);
FLTC_API fltc_status fltc_spectrum_lambda(const fltc_spectrum* s, size_t j, double* out);
FLTC_API fltc_status fltc_spectrum_eval(const fltc_spectrum* s, size_t j, const double* point, size_t dim,
                                        double* out);
FLTC_API fltc_status fltc_heat_kernel(const fltc_spectrum* s, double t, const double* x, const double* y,
                                      size_t dim, double* out);
FLTC_API fltc_status fltc_kernel_q(const fltc_spectrum* s, double t, const double* x, const double* y,
                                   const double* xi, size_t dim, double* out);
FLTC_API void fltc_spectrum_free(fltc_spectrum* s);

/* Bessel functions and zero tables; out must hold count values. */
FLTC_API fltc_status fltc_bessel_j(int m, double x, double* out);
FLTC_API fltc_status fltc_bessel_y(int m, double x, double* out);
FLTC_API fltc_status fltc_jprime_zeros(int m, int count, double* out);
FLTC_API fltc_status fltc_annulus_cross_zeros(int m, double ratio, int count, double* out);

/* Rectangle convolution tables on n uniform nodes per axis and measures on their grids. */
FLTC_API fltc_status fltc_table_rectangle(const double* beta, size_t dim, int n, fltc_table** out);
FLTC_API fltc_status fltc_table_from_json(const char* json, fltc_table** out);
FLTC_API fltc_status fltc_table_to_json(const fltc_table* t, char** out);
FLTC_API size_t fltc_table_size(const fltc_table* t);
FLTC_API size_t fltc_table_identity(const fltc_table* t);
FLTC_API void fltc_table_free(fltc_table* t);

FLTC_API fltc_status fltc_measure_create(const fltc_table* t, const double* weights, size_t n,
                                         fltc_measure** out);
FLTC_API fltc_status fltc_measure_delta(const fltc_table* t, size_t index, fltc_measure** out);
FLTC_API size_t fltc_measure_size(const fltc_measure* m);
FLTC_API fltc_status fltc_measure_weights(const fltc_measure* m, double* out, size_t n);
FLTC_API void fltc_measure_free(fltc_measure* m);

FLTC_API fltc_status fltc_convolve(const fltc_table* t, const fltc_measure* a, const fltc_measure* b,
                                   fltc_measure** out);
FLTC_API fltc_status fltc_poisson(const fltc_table* t, const fltc_measure* nu, fltc_measure** out);

/*
 * Runs one batch command ("eigen", "kernel-scan", "maximizers", "convolve", "axioms",
 * "simulate", "expand-gradient", "zeros", "product-measure") on a JSON config.
 * On success *result holds {"report": {...}, "files": [{"name": ..., "content": ...}]}.
 */
FLTC_API fltc_status fltc_run(const char* command, const char* config_json, char** result);

#ifdef __cplusplus
}
#endif

#endif
