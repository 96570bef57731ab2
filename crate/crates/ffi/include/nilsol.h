/* C interface of the nilsol engine. Generated by cbindgen; do not edit. */

#ifndef NILSOL_H
#define NILSOL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define NILSOL_OK 0

#define NILSOL_ERR_INPUT 2

#define NILSOL_ERR_NUMERICAL 3

#define NILSOL_ERR_ARGUMENT 4

/**
 * Opaque validated model handle.
 */
typedef struct NilsolModel NilsolModel;

/**
 * Run options shared by the sampled and flow entry points. Zero `samples`
 * and zero `t_end` fall back to the defaults; other values pass through.
 */
typedef struct NilsolOptions {
  /**
   * Number of sampled directions (default 32).
   */
  uint64_t samples;
  /**
   * Seed of the deterministic direction sampler.
   */
  uint64_t seed;
  /**
   * Flow horizon (default 1.0).
   */
  double t_end;
  /**
   * Nonzero integrates the volume-normalized flow.
   */
  int normalized;
  /**
   * Nonzero proceeds when the drift is not Killing.
   */
  int force;
  /**
   * Nonzero includes wall-clock timing; breaks byte determinism.
   */
  int timing;
} NilsolOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static C string.
 */
const char *nilsol_version(void);

/**
 * Message of the last failure on this thread; valid until the next failing
 * call on the same thread.
 */
const char *nilsol_last_error(void);

/**
 * Fills `out` with the default options.
 *
 * # Safety
 * `out` must point to writable memory for one `NilsolOptions`.
 */
int nilsol_options_default(struct NilsolOptions *out);

/**
 * Opens and validates a model file; on success stores a handle in `out`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable. The file
 * is re-read by each run call and must stay readable for the handle's life.
 */
int nilsol_model_open(const char *path, struct NilsolModel **out);

/**
 * Releases a model handle. Null is ignored.
 *
 * # Safety
 * `model` must come from `nilsol_model_open` and not be used afterwards.
 */
void nilsol_model_free(struct NilsolModel *model);

/**
 * Releases a string returned by a run call. Null is ignored.
 *
 * # Safety
 * `s` must come from a run call of this library and not be used afterwards.
 */
void nilsol_string_free(char *s);

/**
 * Structural validation report as JSON.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
int nilsol_run_check(const struct NilsolModel *model, const struct NilsolOptions *opts, char **out);

/**
 * Curvature samples at a base point as JSON; `at` may be null for the
 * origin, otherwise it must hold `at_len` coordinates.
 *
 * # Safety
 * `model` must be a live handle; `out` writable; `at` null or valid for
 * `at_len` doubles.
 */
int nilsol_run_curvature(const struct NilsolModel *model,
                         const struct NilsolOptions *opts,
                         const double *at,
                         size_t at_len,
                         char **out);

/**
 * Semialgebraic soliton fit as JSON.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
int nilsol_run_soliton(const struct NilsolModel *model,
                       const struct NilsolOptions *opts,
                       char **out);

/**
 * Ricci-flow integration report as JSON.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
int nilsol_run_flow(const struct NilsolModel *model, const struct NilsolOptions *opts, char **out);

/**
 * Aggregate report (check, curvature, soliton, flow) as JSON.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
int nilsol_run_report(const struct NilsolModel *model,
                      const struct NilsolOptions *opts,
                      char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NILSOL_H */
