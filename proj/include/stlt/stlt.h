#ifndef STLT_H
#define STLT_H

/* C interface to the structured low-rank tensor completion library.
 *
 * All entry points return stlt_status; STLT_OK is 0 and the nonzero codes
 * match the CLI exit-code convention. On failure stlt_last_error() carries a
 * message for the calling thread. Handles are created and released by the
 * paired new/free calls; accessors keep ownership inside the handle.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stlt_status {
  STLT_OK = 0,
  STLT_INVALID_ARG = 1,    /* malformed config, paths or input data */
  STLT_NO_CONVERGENCE = 2, /* run ended in line-search failure, or a
                              derivative check broke its threshold */
  STLT_INTERNAL = 3        /* write failures and internal errors */
} stlt_status;

const char* stlt_version(void);
const char* stlt_last_error(void);

/* Flat run configuration. Keys mirror the CLI flags with dashes replaced by
 * underscores: input, truth, omega, out, constraint (none|nonneg|hankel),
 * tau, rank, dims (comma-separated integer lists), lambda, cost_C, fraction,
 * solver (rcg|rtr), cg_tol, cg_iters, nnls_tol, inner_rounds, eps, max_iters,
 * seed, time_iters (true|false). */
typedef struct stlt_config stlt_config;

stlt_config* stlt_config_new(void);
void stlt_config_free(stlt_config* cfg);
stlt_status stlt_config_set(stlt_config* cfg, const char* key,
                            const char* value);
/* Merges recognised keys of a JSON object file; unknown keys are ignored, so
 * a run manifest is itself a valid config. */
stlt_status stlt_config_load_json(stlt_config* cfg, const char* path);

typedef struct stlt_iter_row {
  int64_t iter;
  double g_value;
  double grad_norm;
  double duality_gap;
  double rel_gap;
  int64_t inner_iters;
  double wall_ms;
} stlt_iter_row;

typedef struct stlt_result stlt_result;

/* Runs completion on config `input`; when `out` is set in the config the
 * artifact set (history.csv, manifest.json, W_hat.tns, plot SVGs) is
 * written there. A result handle is delivered even when the status is
 * STLT_NO_CONVERGENCE; *out stays NULL on other failures. */
stlt_status stlt_complete(const stlt_config* cfg, stlt_result** out);
void stlt_result_free(stlt_result* res);

int64_t stlt_result_history_len(const stlt_result* res);
stlt_status stlt_result_history_row(const stlt_result* res, int64_t i,
                                    stlt_iter_row* row);
/* "converged", "max_iters", "stagnated" or "line_search_failed". */
const char* stlt_result_status(const stlt_result* res);
/* "rcg" or "rtr". */
const char* stlt_result_solver(const stlt_result* res);
double stlt_result_lambda(const stlt_result* res);

/* Recovered tensor, flat column-major (first index fastest). */
int64_t stlt_result_order(const stlt_result* res);
int64_t stlt_result_dim(const stlt_result* res, int64_t k);
int64_t stlt_result_size(const stlt_result* res);
const double* stlt_result_values(const stlt_result* res);

/* Generates a synthetic instance from dims/rank/constraint/fraction/seed and
 * writes observed.tns, truth.tns and manifest.json under config `out`. */
stlt_status stlt_synth(const stlt_config* cfg);

typedef struct stlt_deriv_report {
  double max_grad_rel;
  double max_hess_rel;
  int grad_ok; /* max_grad_rel <= 1e-4 */
  int hess_ok; /* max_hess_rel <= 1e-3 */
} stlt_deriv_report;

/* Finite-difference check at a seeded random point of the configured
 * problem; STLT_NO_CONVERGENCE when a threshold is broken. */
stlt_status stlt_check_derivs(const stlt_config* cfg,
                              stlt_deriv_report* report);

typedef struct stlt_eval_report {
  double rmse_train;
  double rmse_test;
  double min_entry;
  int64_t n_train;
  int64_t n_test;
} stlt_eval_report;

/* RMSE of config `input` against `truth` on the `omega` support (train) and
 * its complement (test). */
stlt_status stlt_eval(const stlt_config* cfg, stlt_eval_report* report);

#ifdef __cplusplus
}
#endif

#endif /* STLT_H */
