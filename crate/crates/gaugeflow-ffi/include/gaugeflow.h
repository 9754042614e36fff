/* C interface to the gaugeflow library. Generated by cbindgen; do not edit. */

#ifndef GAUGEFLOW_H
#define GAUGEFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every ABI call.
 */
typedef enum GfStatus {
  /**
   * Success.
   */
  GF_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  GF_STATUS_NULL_ARGUMENT = 1,
  /**
   * A scalar argument was outside its documented domain.
   */
  GF_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The computation started but failed (lost convexity, CFL, cut locus).
   */
  GF_STATUS_NUMERIC_FAILURE = 3,
  /**
   * Internal panic; the handle state is unspecified but still freeable.
   */
  GF_STATUS_PANIC = 4,
} GfStatus;

/**
 * Regularized-trace branch over one spectrum pair. Opaque.
 */
typedef struct GfBranch GfBranch;

/**
 * Completed sphere flow run. Opaque.
 */
typedef struct GfTrajectory GfTrajectory;

/**
 * One recorded flow snapshot.
 */
typedef struct GfSample {
  /**
   * Flow time.
   */
  double t;
  /**
   * Geodesic radius of the evolving sphere.
   */
  double radius;
  /**
   * Min mean curvature over the surface.
   */
  double h_min;
  /**
   * Max mean curvature over the surface.
   */
  double h_max;
  /**
   * Pinching ratio min(lambda)/H.
   */
  double ratio;
  /**
   * Enclosed volume.
   */
  double volume;
} GfSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *gf_version(void);

/**
 * Create a trace branch for eigenvalue scale `lambda` and offset `b`.
 *
 * On success writes a handle to `*out`; free it with `gf_branch_free`.
 *
 * # Safety
 * `out` must be a valid pointer to writable memory for one pointer.
 */
enum GfStatus gf_branch_new(double lambda, double b, struct GfBranch **out);

/**
 * Release a branch handle. Null is a no-op.
 *
 * # Safety
 * `branch` must be null or a pointer returned by `gf_branch_new` that has
 * not already been freed.
 */
void gf_branch_free(struct GfBranch *branch);

/**
 * Closed-form value of the branch's regularized trace.
 *
 * # Safety
 * `branch` must be a live handle from `gf_branch_new`; `out` must point to
 * writable memory for one double.
 */
enum GfStatus gf_branch_closed_form(const struct GfBranch *branch, double *out);

/**
 * Partial sum of the branch series through mode `n`.
 *
 * # Safety
 * Same contract as `gf_branch_closed_form`.
 */
enum GfStatus gf_branch_partial_sum(const struct GfBranch *branch, size_t n, double *out);

/**
 * Upper bound on the tail left after the partial sum through mode `n`.
 *
 * # Safety
 * Same contract as `gf_branch_closed_form`.
 */
enum GfStatus gf_branch_tail_bound(const struct GfBranch *branch, size_t n, double *out);

/**
 * Flow a geodesic sphere of radius `r0` in curvature `kappa` with step
 * `dt` until extinction or time `t_end`.
 *
 * On success writes a handle to `*out`; free it with
 * `gf_trajectory_free`.
 *
 * # Safety
 * `out` must be a valid pointer to writable memory for one pointer.
 */
enum GfStatus gf_sphere_flow_solve(double r0,
                                   double kappa,
                                   double dt,
                                   double t_end,
                                   struct GfTrajectory **out);

/**
 * Release a trajectory handle. Null is a no-op.
 *
 * # Safety
 * `traj` must be null or a pointer returned by `gf_sphere_flow_solve`
 * that has not already been freed.
 */
void gf_trajectory_free(struct GfTrajectory *traj);

/**
 * Number of recorded snapshots.
 *
 * # Safety
 * `traj` must be a live handle; `out` must point to writable memory for
 * one `size_t`.
 */
enum GfStatus gf_trajectory_len(const struct GfTrajectory *traj, size_t *out);

/**
 * Snapshot `i`, in recording order. Fails with `INVALID_ARGUMENT` when
 * `i` is out of range.
 *
 * # Safety
 * `traj` must be a live handle; `out` must point to writable memory for
 * one `GfSample`.
 */
enum GfStatus gf_trajectory_sample(const struct GfTrajectory *traj, size_t i, struct GfSample *out);

/**
 * Extrapolated extinction time. Writes `false` and NaN when the run hit
 * `t_end` before extinction.
 *
 * # Safety
 * `traj` must be a live handle; `out_found` and `out_time` must point to
 * writable memory for one `bool` and one double.
 */
enum GfStatus gf_trajectory_extinction(const struct GfTrajectory *traj,
                                       bool *out_found,
                                       double *out_time);

/**
 * Max relative deviation of enclosed volume from the exact monotone law
 * along the run.
 *
 * # Safety
 * `traj` must be a live handle; `out` must point to writable memory for
 * one double.
 */
enum GfStatus gf_trajectory_volume_law_max_dev(const struct GfTrajectory *traj, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAUGEFLOW_H */
