/* Partially symmetric 5th-order CPD (CPS5) and ICA-CPA: C interface.
 *
 * Every fallible call returns a cps5_status; on failure cps5_last_error() holds a message for
 * the calling thread. Handles are opaque and released with the matching *_free function.
 * Complex data crosses the boundary as interleaved (re, im) doubles in row-major order.
 */
#ifndef CPS5_CPS5_H
#define CPS5_CPS5_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(CPS5_BUILDING_LIBRARY)
#define CPS5_API __declspec(dllexport)
#else
#define CPS5_API __declspec(dllimport)
#endif
#else
#define CPS5_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cps5_status {
  CPS5_OK = 0,
  CPS5_ERR_INVALID_ARGUMENT = 1,
  CPS5_ERR_DIMENSION_MISMATCH = 2,
  CPS5_ERR_RANK_OUT_OF_RANGE = 3,
  CPS5_ERR_IO = 4,
  CPS5_ERR_FORMAT = 5,
  CPS5_ERR_NUMERICAL = 6,
  CPS5_ERR_DIVERGENCE = 7,
  CPS5_ERR_INTERNAL = 99
} cps5_status;

typedef enum cps5_method { CPS5_METHOD_JD = 0, CPS5_METHOD_EALS = 1, CPS5_METHOD_EALS_JD = 2 } cps5_method;

typedef struct cps5_tensor cps5_tensor;
typedef struct cps5_decomposition cps5_decomposition;
typedef struct cps5_sim_result cps5_sim_result;
typedef struct cps5_selftest_result cps5_selftest_result;

CPS5_API const char* cps5_version(void);
CPS5_API const char* cps5_status_name(cps5_status status);
/* Message of the last failed call on this thread; "" when none. */
CPS5_API const char* cps5_last_error(void);

/* "jd", "eals", "eals_jd". */
CPS5_API cps5_status cps5_method_parse(const char* name, cps5_method* out);
CPS5_API const char* cps5_method_name(cps5_method method);

/* ---- tensors ---------------------------------------------------------------------------- */

/* `data` holds 2 * prod(dims) doubles, or NULL for a zero tensor. */
CPS5_API cps5_status cps5_tensor_create(const uint64_t* dims, size_t order, const double* data, cps5_tensor** out);
/* CT1 binary files. */
CPS5_API cps5_status cps5_tensor_load(const char* path, cps5_tensor** out);
CPS5_API cps5_status cps5_tensor_save(const cps5_tensor* t, const char* path);
CPS5_API void cps5_tensor_free(cps5_tensor* t);

CPS5_API size_t cps5_tensor_order(const cps5_tensor* t);
CPS5_API size_t cps5_tensor_size(const cps5_tensor* t);
CPS5_API cps5_status cps5_tensor_dims(const cps5_tensor* t, uint64_t* dims, size_t capacity);
/* Copies 2 * size doubles; `capacity` counts doubles. */
CPS5_API cps5_status cps5_tensor_copy_data(const cps5_tensor* t, double* data, size_t capacity);
/* max |T(i1,j1,i2,j2,k) - conj(T(i2,j2,i1,j1,k))| of a 5-way tensor. */
CPS5_API cps5_status cps5_tensor_partial_symmetry(const cps5_tensor* t, double* deviation);

/* T = sum_r a_r o b_r o conj(a_r) o conj(b_r) o d_r. A (I x R) and B (J x R) interleaved complex,
 * D (K x R) real, all row-major. */
CPS5_API cps5_status cps5_synthesize(const double* A, const double* B, const double* D, size_t I, size_t J, size_t K,
                                     size_t R, cps5_tensor** out);

/* ---- decomposition ---------------------------------------------------------------------- */

typedef struct cps5_decompose_options {
  size_t rank;
  cps5_method method;
  int refit_d;              /* jd: least-squares refit of D (default 1) */
  int rnjd_max_sweeps;      /* default 200 */
  double gap_warning;       /* detection-system gap warning threshold (default 10) */
  double w_condition_cap;   /* W matrices above this condition number are dropped (default 1e10) */
  int max_iters;            /* eals: default 1000 */
  double rel_fit_tol;       /* eals: default 1e-8 */
  int els_enabled;          /* eals: default 1 */
  uint64_t seed;            /* eals random initialization */
} cps5_decompose_options;

CPS5_API void cps5_decompose_options_init(cps5_decompose_options* opts);

/* 5-way (I, J, I, J, K) tensor -> factors A, B, D. */
CPS5_API cps5_status cps5_decompose(const cps5_tensor* t, const cps5_decompose_options* opts, cps5_decomposition** out);
/* 3-way (I, J, K) data tensor -> factors A, B (and D of the cumulant tensor) plus sources S. */
CPS5_API cps5_status cps5_ica_cpa(const cps5_tensor* x3, const cps5_decompose_options* opts, cps5_decomposition** out);
CPS5_API void cps5_decomposition_free(cps5_decomposition* d);

/* which: 'A', 'B', 'D', or 'S' (ICA-CPA only). The factor is returned as a 2-way tensor. */
CPS5_API cps5_status cps5_decomposition_factor(const cps5_decomposition* d, char which, cps5_tensor** out);
CPS5_API double cps5_decomposition_residual(const cps5_decomposition* d);
CPS5_API double cps5_decomposition_time(const cps5_decomposition* d);
/* Diagnostics of every stage that ran, as JSON; owned by the handle. */
CPS5_API const char* cps5_decomposition_report_json(const cps5_decomposition* d);

/* ---- simulations ------------------------------------------------------------------------ */

typedef struct cps5_sim_options {
  int which;                  /* 1 or 2 */
  const double* snr_db;       /* NULL: default grid */
  size_t snr_count;
  int trials;
  uint64_t seed;
  const cps5_method* methods; /* NULL: all three */
  size_t method_count;
  int jobs;
  int collinear;              /* sim1 only (default 1) */
  size_t samples;             /* sim2 only (default 1000) */
  int max_iters;              /* eals */
  double rel_fit_tol;         /* eals */
} cps5_sim_options;

CPS5_API void cps5_sim_options_init(cps5_sim_options* opts, int which);
CPS5_API cps5_status cps5_run_simulation(const cps5_sim_options* opts, cps5_sim_result** out);
CPS5_API void cps5_sim_result_free(cps5_sim_result* r);
CPS5_API size_t cps5_sim_result_rows(const cps5_sim_result* r);
CPS5_API size_t cps5_sim_result_failed(const cps5_sim_result* r);
/* Detail (error message) of a row in CSV order; "" for successful rows. */
CPS5_API const char* cps5_sim_result_row_detail(const cps5_sim_result* r, size_t row);
CPS5_API const char* cps5_sim_result_csv(const cps5_sim_result* r);
CPS5_API const char* cps5_sim_result_summary_json(const cps5_sim_result* r);
CPS5_API const char* cps5_sim_result_table(const cps5_sim_result* r);

/* ---- self test -------------------------------------------------------------------------- */

/* `inject`: NULL or the name of a check to perturb deliberately. */
CPS5_API cps5_status cps5_selftest(const char* inject, cps5_selftest_result** out);
CPS5_API void cps5_selftest_free(cps5_selftest_result* r);
CPS5_API size_t cps5_selftest_count(const cps5_selftest_result* r);
CPS5_API const char* cps5_selftest_name(const cps5_selftest_result* r, size_t i);
CPS5_API int cps5_selftest_passed(const cps5_selftest_result* r, size_t i);
CPS5_API const char* cps5_selftest_detail(const cps5_selftest_result* r, size_t i);
CPS5_API double cps5_selftest_seconds(const cps5_selftest_result* r, size_t i);

#ifdef __cplusplus
}
#endif

#endif /* CPS5_CPS5_H */
