#ifndef TOPLAB_H
#define TOPLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every API call.
 */
enum ToplabStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  /**
   * Success.
   */
  Ok = 0,
  /**
   * A required pointer argument was null.
   */
  NullArgument = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  InvalidUtf8 = 2,
  /**
   * The configuration was rejected; `toplab_last_error` names the field.
   */
  InvalidConfig = 3,
  /**
   * The integration itself failed.
   */
  RunFailed = 4,
  /**
   * No verification suite has the requested name.
   */
  UnknownSuite = 5,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum ToplabStatus ToplabStatus;
#else
typedef int32_t ToplabStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque trajectory handle.
 */
typedef struct ToplabTrajectory ToplabTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or an empty string.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *toplab_last_error(void);

/**
 * Version of the library, as a static string.
 */
const char *toplab_version(void);

/**
 * Run the simulation described by a JSON run configuration (the same shape
 * `toplab simulate --config` reads) and hand back a trajectory.
 *
 * # Safety
 * `config_json` must be a valid NUL-terminated string; `out` must point to
 * writable storage for one pointer. On success `*out` owns the trajectory
 * and must be released with [`toplab_trajectory_free`].
 */
ToplabStatus toplab_simulate_json(const char *config_json, struct ToplabTrajectory **out);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `tr` must be null or a live handle from [`toplab_simulate_json`].
 */
uintptr_t toplab_trajectory_len(const struct ToplabTrajectory *tr);

/**
 * State dimension, or 0 for a null handle.
 *
 * # Safety
 * `tr` must be null or a live handle from [`toplab_simulate_json`].
 */
uintptr_t toplab_trajectory_dim(const struct ToplabTrajectory *tr);

/**
 * Borrowed pointer to the node times, `len` values, or null.
 *
 * # Safety
 * `tr` must be null or a live handle; the slice dies with the handle.
 */
const double *toplab_trajectory_times(const struct ToplabTrajectory *tr);

/**
 * Borrowed pointer to the row-major states, `len * dim` values, or null.
 *
 * # Safety
 * `tr` must be null or a live handle; the slice dies with the handle.
 */
const double *toplab_trajectory_data(const struct ToplabTrajectory *tr);

/**
 * Release a trajectory handle. Null is a no-op.
 *
 * # Safety
 * `tr` must be null or a handle from [`toplab_simulate_json`] not yet freed.
 */
void toplab_trajectory_free(struct ToplabTrajectory *tr);

/**
 * Run one verification suite (or "all") and hand back the JSON report the
 * CLI would print. `out_all_pass` (nullable) receives 1 if every check
 * passed, else 0.
 *
 * # Safety
 * `suite` must be a valid NUL-terminated string; `out_report_json` must
 * point to writable storage for one pointer and the returned string must be
 * released with [`toplab_string_free`].
 */
ToplabStatus toplab_verify_suite(const char *suite, char **out_report_json, int32_t *out_all_pass);

/**
 * Release a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a string from [`toplab_verify_suite`] not yet freed.
 */
void toplab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPLAB_H */
