#ifndef NSV_FFI_H
#define NSV_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NsvStatus {
  NSV_STATUS_OK = 0,
  NSV_STATUS_NULL_POINTER = 1,
  NSV_STATUS_VALIDATION = 2,
  NSV_STATUS_DOMAIN = 3,
  NSV_STATUS_STRUCTURAL = 4,
  NSV_STATUS_NUMERICAL = 5,
  NSV_STATUS_INSTABILITY = 6,
  NSV_STATUS_IO = 7,
  NSV_STATUS_PARSE = 8,
  NSV_STATUS_OUT_OF_RANGE = 9,
  NSV_STATUS_PANIC = 10,
} NsvStatus;

typedef enum NsvCharacterKind {
  NSV_CHARACTER_KIND_FINITE = 0,
  /**
   * r* = −n/2
   */
  NSV_CHARACTER_KIND_MINUS_N_HALF = 1,
  NSV_CHARACTER_KIND_INFINITY = 2,
} NsvCharacterKind;

/**
 * Opaque datum handle.
 */
typedef struct NsvDatum NsvDatum;

/**
 * Opaque trajectory handle.
 */
typedef struct NsvTrajectory NsvTrajectory;

/**
 * Grid run description for [`nsv_simulate`]. `envelope <= 0` disables the
 * Gaussian envelope and `amplitude <= 0` keeps the sampled datum unscaled.
 */
typedef struct NsvRunParams {
  size_t n_points;
  double box_length;
  double alpha;
  double nu;
  double dt;
  double t_end;
  double amplitude;
  double envelope;
  double sample_spacing;
  size_t samples_per_decade;
  bool nonlinear;
} NsvRunParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *nsv_last_error_message(void);

/**
 * Static, NUL-terminated version string.
 */
const char *nsv_version(void);

/**
 * Power-law datum a(ρ) = ρ^q on [0, κ] in dimension n.
 */
enum NsvStatus nsv_datum_power_law(size_t n,
                                   double q,
                                   double kappa,
                                   uint64_t seed,
                                   struct NsvDatum **out_datum);

enum NsvStatus nsv_datum_annulus(size_t n,
                                 double delta,
                                 double kappa,
                                 uint64_t seed,
                                 struct NsvDatum **out_datum);

enum NsvStatus nsv_datum_critical_log(size_t n,
                                      double kappa,
                                      uint64_t seed,
                                      struct NsvDatum **out_datum);

/**
 * Reads a datum file written by `nsv gen-datum`.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string.
 */
enum NsvStatus nsv_datum_load(const char *path, struct NsvDatum **out_datum);

/**
 * # Safety
 * `datum` must come from an `nsv_datum_*` constructor and not be used afterwards.
 */
void nsv_datum_free(struct NsvDatum *datum);

/**
 * Estimated decay character for derivative order `s`. `value` receives
 * the numeric value (−n/2 or +∞ for the sentinels).
 *
 * # Safety
 * Pointers must be valid; `datum` must be a live handle.
 */
enum NsvStatus nsv_datum_decay_character(const struct NsvDatum *datum,
                                         double s,
                                         enum NsvCharacterKind *kind,
                                         double *value);

/**
 * ‖v(t)‖²_{H¹_α} of the linear evolution of the continuum datum.
 *
 * # Safety
 * Pointers must be valid; `datum` must be a live handle.
 */
enum NsvStatus nsv_linear_h1alpha_sq(const struct NsvDatum *datum,
                                     double alpha,
                                     double nu,
                                     double t,
                                     double *result);

/**
 * Predicted H¹_α decay exponent of the nonlinear solution for `r_star`.
 *
 * # Safety
 * `result` must be valid for writes.
 */
enum NsvStatus nsv_predicted_exponent(double r_star, double *result);

/**
 * Predicted exponent of the nonlinear-minus-linear difference.
 *
 * # Safety
 * `result` must be valid for writes.
 */
enum NsvStatus nsv_predicted_difference_exponent(double r_star, double *result);

/**
 * Samples the datum on the grid and integrates it.
 *
 * # Safety
 * Pointers must be valid; `datum` must be a live handle.
 */
enum NsvStatus nsv_simulate(const struct NsvDatum *datum,
                            const struct NsvRunParams *params,
                            struct NsvTrajectory **out_traj);

/**
 * # Safety
 * `traj` must come from [`nsv_simulate`] and not be used afterwards.
 */
void nsv_trajectory_free(struct NsvTrajectory *traj);

/**
 * Number of samples; 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t nsv_trajectory_len(const struct NsvTrajectory *traj);

/**
 * Sample `index`: time, ‖u‖²_{H¹_α} and the energy-balance residual.
 *
 * # Safety
 * Pointers must be valid; `traj` must be a live handle.
 */
enum NsvStatus nsv_trajectory_sample(const struct NsvTrajectory *traj,
                                     size_t index,
                                     double *t,
                                     double *h1alpha_sq,
                                     double *balance_residual);

/**
 * Fitted decay exponent of ‖u‖²_{H¹_α} over `[t0, t1]`.
 *
 * # Safety
 * Pointers must be valid; `traj` must be a live handle.
 */
enum NsvStatus nsv_trajectory_fit_exponent(const struct NsvTrajectory *traj,
                                           double t0,
                                           double t1,
                                           double *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSV_FFI_H */
