#ifndef TEPKIT_H
#define TEPKIT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  TEP_STATUS_OK = 0,
  TEP_STATUS_NULL_POINTER = 1,
  TEP_STATUS_INVALID_UTF8 = 2,
  TEP_STATUS_PARSE = 3,
  TEP_STATUS_VALIDATION = 4,
  TEP_STATUS_INVALID_ARGUMENT = 5,
  TEP_STATUS_INFEASIBLE = 6,
  TEP_STATUS_IO = 7,
  TEP_STATUS_SOLVER = 8,
  TEP_STATUS_BUFFER_TOO_SMALL = 9,
  TEP_STATUS_PANIC = 10,
} TepStatus;

/**
 * A loaded, validated instance.
 */
typedef struct TepInstance TepInstance;

/**
 * Outcome of a decomposition run.
 */
typedef struct TepResult TepResult;

/**
 * Options for [`tep_run_ph`] and [`tep_run_baseline`]. Fill with
 * [`tep_ph_options_default`] first.
 */
typedef struct {
  double beta;
  double alpha;
  /**
   * Slack penalty; values ≤ 0 select the instance default.
   */
  double lambda;
  /**
   * Seconds per subproblem; ≤ 0 means unlimited.
   */
  double subproblem_seconds;
  /**
   * Overall seconds; negative or infinite means unlimited.
   */
  double overall_seconds;
  /**
   * 0 means no iteration cap.
   */
  size_t max_iterations;
  size_t workers;
  uint64_t seed;
} TepPhOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or NULL. The string
 * stays valid until the next call into this library on the same thread.
 */
const char *tep_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tep_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void tep_string_free(char *s);

/**
 * Parses and validates an instance from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a writable pointer.
 */
TepStatus tep_instance_load_json(const char *json, TepInstance **out);

/**
 * Reads, parses and validates an instance file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a writable pointer.
 */
TepStatus tep_instance_load_file(const char *path, TepInstance **out);

/**
 * # Safety
 * `inst` must come from a load call and not have been freed, or be NULL.
 */
void tep_instance_free(TepInstance *inst);

/**
 * Stores bus, candidate and scenario counts. Any output may be NULL.
 *
 * # Safety
 * `inst` must be a live instance; non-NULL outputs must be writable.
 */
TepStatus tep_instance_sizes(const TepInstance *inst,
                             size_t *buses,
                             size_t *candidates,
                             size_t *scenarios);

/**
 * Copies the candidate line ids in ascending order.
 *
 * # Safety
 * `buf` must hold `cap` elements; `len` must be writable.
 */
TepStatus tep_instance_candidates(const TepInstance *inst, size_t *buf, size_t cap, size_t *len);

/**
 * Solves the dispatch LP of scenario `scenario` with the candidates in
 * `ids` built. Stores the LP objective (generation cost plus penalized
 * slack) and the total capacity violation.
 *
 * # Safety
 * `ids` must hold `len` elements (or be NULL when `len` is 0); outputs
 * must be writable.
 */
TepStatus tep_solve_lp(const TepInstance *inst,
                       size_t scenario,
                       const size_t *ids,
                       size_t len,
                       double lambda,
                       double *objective,
                       double *violation);

/**
 * Evaluates a plan on every scenario with cross-scenario repair. Stores
 * the penalized expected cost and the size of the repaired plan.
 *
 * # Safety
 * As for [`tep_solve_lp`].
 */
TepStatus tep_evaluate_plan(const TepInstance *inst,
                            const size_t *ids,
                            size_t len,
                            double lambda,
                            double *penalized_cost,
                            size_t *repaired_len);

/**
 * Exact branch-and-bound over all scenarios. `seconds` ≤ 0 means no time
 * limit. On success the incumbent is copied to `buf` and `optimal` is set
 * to 1 when optimality was proven.
 *
 * # Safety
 * `buf` must hold `cap` elements; all other outputs must be writable.
 */
TepStatus tep_solve_bnb(const TepInstance *inst,
                        double seconds,
                        size_t *buf,
                        size_t cap,
                        size_t *len,
                        double *upper_bound,
                        double *lower_bound,
                        int32_t *optimal);

/**
 * Writes the default options.
 *
 * # Safety
 * `out` must be writable.
 */
TepStatus tep_ph_options_default(TepPhOptions *out);

/**
 * Progressive hedging.
 *
 * # Safety
 * `inst` must be live; `options` readable; `out` writable.
 */
TepStatus tep_run_ph(const TepInstance *inst, const TepPhOptions *options, TepResult **out);

/**
 * One-pass baseline decomposition.
 *
 * # Safety
 * As for [`tep_run_ph`].
 */
TepStatus tep_run_baseline(const TepInstance *inst, const TepPhOptions *options, TepResult **out);

/**
 * # Safety
 * `res` must come from a run call and not have been freed, or be NULL.
 */
void tep_result_free(TepResult *res);

/**
 * Stores the penalized cost and iteration count of a run.
 *
 * # Safety
 * `res` must be live; outputs writable.
 */
TepStatus tep_result_summary(const TepResult *res, double *penalized_cost, size_t *iterations);

/**
 * Copies the best plan of a run.
 *
 * # Safety
 * `buf` must hold `cap` elements; `len` writable.
 */
TepStatus tep_result_plan(const TepResult *res, size_t *buf, size_t cap, size_t *len);

/**
 * The full run as JSON; release with [`tep_string_free`].
 *
 * # Safety
 * `res` must be live; `out` writable.
 */
TepStatus tep_result_json(const TepResult *res, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEPKIT_H */
