/* C interface to the cltb core. Every call returns a cltb_status; on failure
 * cltb_last_error() describes the problem (thread-local, valid until the next
 * call on the same thread). Strings returned through char** are owned by the
 * caller and released with cltb_string_free. */
#ifndef CLTB_CLTB_H
#define CLTB_CLTB_H

#include <stddef.h>
#include <stdint.h>

#if defined(CLTB_BUILDING_LIBRARY)
#define CLTB_API __attribute__((visibility("default")))
#else
#define CLTB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cltb_status {
  CLTB_OK = 0,
  CLTB_INVALID_INPUT = 1,
  CLTB_LINEAR_DEPENDENCE = 2,
  CLTB_UNSUPPORTED_DIMENSION = 3,
  CLTB_MISSING_MOMENTS = 4,
  CLTB_INVALID_MOMENTS = 5,
  CLTB_WRONG_PAIR_KIND = 6,
  CLTB_UNSUPPORTED = 7,
  CLTB_CONFIG = 8,
  CLTB_IO = 9,
  CLTB_INTERNAL = 100
} cltb_status;

CLTB_API const char* cltb_last_error(void);
CLTB_API void cltb_string_free(char* s);

/* Directions */

typedef struct cltb_directions cltb_directions;

typedef struct cltb_norms {
  double sum_l4_sq;
  double sum_l3_cubed;
  double sum_l4_all_sq;
} cltb_norms;

/* centered != 0 drops the constant row. */
CLTB_API cltb_status cltb_directions_hypercube(size_t n, size_t k, int centered,
                                               cltb_directions** out);
CLTB_API cltb_status cltb_directions_random(size_t n, size_t k, uint64_t seed, int centered,
                                            cltb_directions** out);
/* rows: k x n, row-major. kind: "orthonormal", "linearly-independent" or
 * "centered-orthonormal". */
CLTB_API cltb_status cltb_directions_from_rows(const double* rows, size_t k, size_t n,
                                               const char* kind, cltb_directions** out);
CLTB_API void cltb_directions_free(cltb_directions* ds);
CLTB_API size_t cltb_directions_n(const cltb_directions* ds);
CLTB_API size_t cltb_directions_k(const cltb_directions* ds);
CLTB_API cltb_status cltb_directions_norms(const cltb_directions* ds, cltb_norms* out);
CLTB_API cltb_status cltb_directions_lambda_max(const cltb_directions* ds, double* out);
CLTB_API cltb_status cltb_directions_to_text(const cltb_directions* ds, char** out);

/* Bounds */

typedef struct cltb_moments {
  double abs3_max;
  double fourth_max;
  double abs3;
  double fourth;
  int has_mixed;
  double mixed_4;
  double mixed_var;
} cltb_moments;

typedef struct cltb_seminorms {
  double g1;
  double g2;
  double grad_sup;
  int has_hess_op;
  double hess_op_sup;
} cltb_seminorms;

typedef struct cltb_constants {
  double a;
  double b;
  double c;
} cltb_constants;

typedef struct cltb_bound {
  double term_fourth;
  double term_third;
  double term_mixed;
  double total;
  double lambda;
  int hessian_fallback;
} cltb_bound;

CLTB_API cltb_constants cltb_default_constants(void);

/* theorem: "T1".."T5". constants may be NULL (defaults); ignored by T1-T3. */
CLTB_API cltb_status cltb_bound_evaluate(const char* theorem, const cltb_directions* ds,
                                         const cltb_moments* m, const cltb_seminorms* g,
                                         const cltb_constants* constants, cltb_bound* out);

/* Experiments */

typedef struct cltb_experiment cltb_experiment;

typedef struct cltb_overrides {
  int has_seed;
  uint64_t seed;
  int has_samples;
  size_t samples;
  const char* theorem; /* NULL: keep */
  int has_threads;
  unsigned threads;
  const char* output; /* NULL: keep */
} cltb_overrides;

/* base_dir resolves relative file paths in the config; overrides may be NULL. */
CLTB_API cltb_status cltb_experiment_create(const char* json, const char* base_dir,
                                            const cltb_overrides* overrides,
                                            cltb_experiment** out);
CLTB_API void cltb_experiment_free(cltb_experiment* ex);
CLTB_API cltb_status cltb_experiment_set_shrink(cltb_experiment* ex, double factor);
CLTB_API cltb_status cltb_experiment_set_lambda_scale(cltb_experiment* ex, double scale);
/* Output path from the config, or NULL. Owned by the experiment. */
CLTB_API const char* cltb_experiment_output(const cltb_experiment* ex);
CLTB_API const char* cltb_experiment_digest(const cltb_experiment* ex);
/* Newline-separated warnings (possibly empty). */
CLTB_API cltb_status cltb_experiment_warnings(const cltb_experiment* ex, char** out);

CLTB_API cltb_status cltb_experiment_bound_csv(const cltb_experiment* ex, char** csv);
/* *pass is 1 when every row passed. */
CLTB_API cltb_status cltb_experiment_verify(const cltb_experiment* ex, char** csv, int* pass);
/* axis: "n" or "k". */
CLTB_API cltb_status cltb_experiment_scan(const cltb_experiment* ex, const char* axis,
                                          const size_t* values, size_t count, char** csv,
                                          int* pass);
CLTB_API cltb_status cltb_experiment_check(const cltb_experiment* ex, char** report, int* pass);
CLTB_API cltb_status cltb_experiment_moments_csv(const cltb_experiment* ex, char** csv);

#ifdef __cplusplus
}
#endif

#endif
