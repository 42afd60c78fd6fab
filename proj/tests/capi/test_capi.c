/* Exercises the shared library through its C interface only. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "fltc/fltc.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

int main(void) {
  const double pi2 = 9.869604401089358;
  double beta[2] = {1.0, 1.0};
  fltc_domain* square = NULL;
  EXPECT(fltc_domain_rectangle(beta, 2, &square) == FLTC_OK);
  EXPECT(fltc_domain_dimension(square) == 2);

  fltc_spectrum* s = NULL;
  EXPECT(fltc_spectrum_compute(square, 4, &s) == FLTC_OK);
  EXPECT(fltc_spectrum_size(s) >= 4);
  double lam = -1.0;
  EXPECT(fltc_spectrum_lambda(s, 1, &lam) == FLTC_OK && fabs(lam - pi2) < 1e-12);
  EXPECT(fltc_spectrum_lambda(s, 1000, &lam) == FLTC_ERR_INVALID_ARGUMENT);
  EXPECT(strlen(fltc_last_error()) > 0);
  double outside[2] = {2.0, 0.5}, v = 0.0;
  EXPECT(fltc_spectrum_eval(s, 1, outside, 2, &v) == FLTC_ERR_OUTSIDE_DOMAIN);
  fltc_spectrum_free(s);
  fltc_domain_free(square);

  fltc_domain* disk = NULL;
  EXPECT(fltc_domain_disk(-1.0, &disk) == FLTC_ERR_INVALID_ARGUMENT);
  EXPECT(disk == NULL);

  double j = 0.0;
  EXPECT(fltc_bessel_j(0, 2.404825557695773, &j) == FLTC_OK && fabs(j) < 1e-12);
  EXPECT(fltc_bessel_y(0, -1.0, &j) == FLTC_ERR_DOMAIN);
  double zeros[2];
  EXPECT(fltc_jprime_zeros(1, 2, zeros) == FLTC_OK && fabs(zeros[0] - 1.8411837813406593) < 1e-12);

  double line[1] = {1.0};
  fltc_table* t = NULL;
  EXPECT(fltc_table_rectangle(line, 1, 21, &t) == FLTC_OK);
  EXPECT(fltc_table_size(t) == 21 && fltc_table_identity(t) == 0);
  fltc_measure *a = NULL, *b = NULL, *c = NULL;
  EXPECT(fltc_measure_delta(t, 6, &a) == FLTC_OK);
  EXPECT(fltc_measure_delta(t, 8, &b) == FLTC_OK);
  EXPECT(fltc_convolve(t, a, b, &c) == FLTC_OK);
  double w[21];
  EXPECT(fltc_measure_weights(c, w, 21) == FLTC_OK);
  EXPECT(w[2] == 0.5 && w[14] == 0.5);
  fltc_measure_free(a);
  EXPECT(fltc_measure_delta(t, 21, &a) == FLTC_ERR_INVALID_ARGUMENT && a == NULL);

  char* json = NULL;
  EXPECT(fltc_table_to_json(t, &json) == FLTC_OK && json != NULL);
  fltc_table* back = NULL;
  EXPECT(fltc_table_from_json(json, &back) == FLTC_OK && fltc_table_size(back) == 21);
  fltc_string_free(json);
  fltc_table_free(back);
  fltc_measure_free(b);
  fltc_measure_free(c);
  fltc_table_free(t);

  char* result = NULL;
  EXPECT(fltc_run("zeros", "{\"m\": 0, \"count\": 3}", &result) == FLTC_OK);
  EXPECT(result != NULL && strstr(result, "\"zeros.csv\"") != NULL);
  fltc_string_free(result);
  EXPECT(fltc_run("no-such-command", "{}", &result) == FLTC_ERR_CONFIG);
  EXPECT(fltc_run("eigen", "{not json", &result) == FLTC_ERR_CONFIG);
  EXPECT(strcmp(fltc_status_name(FLTC_ERR_CONFIG), "config") == 0);

  printf("%d failure(s)\n", failures);
  return failures ? 1 : 0;
}
