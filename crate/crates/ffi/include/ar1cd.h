#ifndef AR1CD_H
#define AR1CD_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum Ar1cdStatus {
  AR1CD_STATUS_OK = 0,
  AR1CD_STATUS_NULL_POINTER = 1,
  AR1CD_STATUS_INVALID_ARGUMENT = 2,
  AR1CD_STATUS_DOMAIN = 3,
  AR1CD_STATUS_NUMERICAL = 4,
  AR1CD_STATUS_BUFFER_TOO_SMALL = 5,
  AR1CD_STATUS_PANIC = 6,
} Ar1cdStatus;

/**
 * Confidence distribution on a grid.
 */
typedef struct Ar1cdCd Ar1cdCd;

/**
 * Sorted draws from a unit-root limit distribution.
 */
typedef struct Ar1cdLimitSample Ar1cdLimitSample;

/**
 * Observed series.
 */
typedef struct Ar1cdSeries Ar1cdSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ar1cd_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ar1cd_version(void);

/**
 * Copies `len` values into a new series handle.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be writable.
 */
enum Ar1cdStatus ar1cd_series_new(const double *values,
                                  size_t len,
                                  bool demean,
                                  struct Ar1cdSeries **out);

/**
 * # Safety
 * `series` must come from [`ar1cd_series_new`] and not be freed yet, or be NULL.
 */
void ar1cd_series_free(struct Ar1cdSeries *series);

/**
 * # Safety
 * `series` must be a live handle or NULL (which yields 0).
 */
size_t ar1cd_series_len(const struct Ar1cdSeries *series);

/**
 * # Safety
 * `series` must be a live handle; `out` must be writable.
 */
enum Ar1cdStatus ar1cd_mle_phi(const struct Ar1cdSeries *series, double *out);

/**
 * # Safety
 * `series` must be a live handle; `out` must be writable.
 */
enum Ar1cdStatus ar1cd_mle_sigma2(const struct Ar1cdSeries *series, double *out);

/**
 * Gaussian AR(1) log-likelihood with `y_0 = 0`.
 *
 * # Safety
 * `series` must be a live handle; `out` must be writable.
 */
enum Ar1cdStatus ar1cd_log_likelihood(const struct Ar1cdSeries *series,
                                      double phi,
                                      double sigma2,
                                      double *out);

/**
 * Simulated distribution on `[phi_lo, phi_hi]` with `intervals` steps.
 *
 * # Safety
 * `out` must be writable.
 */
enum Ar1cdStatus ar1cd_estimate_cd(double phi_obs,
                                   double phi_lo,
                                   double phi_hi,
                                   size_t intervals,
                                   size_t n,
                                   size_t reps,
                                   uint64_t seed,
                                   struct Ar1cdCd **out);

/**
 * Residual-bootstrap distribution on `[phi_lo, 1]` from a plan drawn with
 * `seed`.
 *
 * # Safety
 * `series` must be a live handle; `out` must be writable.
 */
enum Ar1cdStatus ar1cd_bootstrap_cd(const struct Ar1cdSeries *series,
                                    double phi_lo,
                                    size_t intervals,
                                    size_t reps,
                                    uint64_t seed,
                                    struct Ar1cdCd **out);

/**
 * Flat-prior distribution on `[phi_lo, 1]`.
 *
 * # Safety
 * `series` must be a live handle; `out` must be writable.
 */
enum Ar1cdStatus ar1cd_flat_prior_cd(const struct Ar1cdSeries *series,
                                     double phi_lo,
                                     size_t intervals,
                                     struct Ar1cdCd **out);

/**
 * Flat prior with point mass `b` at the unit root, on `[phi_lo, 1]`.
 *
 * # Safety
 * `series` must be a live handle; `out` must be writable.
 */
enum Ar1cdStatus ar1cd_spike_prior_cd(const struct Ar1cdSeries *series,
                                      double phi_lo,
                                      size_t intervals,
                                      double b,
                                      struct Ar1cdCd **out);

/**
 * Number of grid points, 0 for NULL.
 *
 * # Safety
 * `cd` must be a live handle or NULL.
 */
size_t ar1cd_cd_len(const struct Ar1cdCd *cd);

/**
 * Copies grid points and values into caller buffers of capacity `cap`.
 * Either buffer may be NULL to skip it.
 *
 * # Safety
 * `cd` must be a live handle; non-NULL buffers must hold `cap` doubles.
 */
enum Ar1cdStatus ar1cd_cd_copy(const struct Ar1cdCd *cd, double *phi, double *values, size_t cap);

/**
 * Equal-tailed interval at `level`.
 *
 * # Safety
 * `cd` must be a live handle; output pointers must be writable.
 */
enum Ar1cdStatus ar1cd_cd_interval(const struct Ar1cdCd *cd,
                                   double level,
                                   double *lo,
                                   double *hi,
                                   bool *hi_clipped);

/**
 * # Safety
 * `cd` must be a live handle; `out` must be writable.
 */
enum Ar1cdStatus ar1cd_cd_median(const struct Ar1cdCd *cd, double *out);

/**
 * # Safety
 * `cd` must come from an estimator call and not be freed yet, or be NULL.
 */
void ar1cd_cd_free(struct Ar1cdCd *cd);

/**
 * Draws `reps` values of `m (phi_hat - 1)` at the unit root with inner
 * sample size `inner_n`.
 *
 * # Safety
 * `out` must be writable.
 */
enum Ar1cdStatus ar1cd_df_sample(size_t reps,
                                 size_t inner_n,
                                 uint64_t seed,
                                 struct Ar1cdLimitSample **out);

/**
 * Empirical `P(Z <= z)`.
 *
 * # Safety
 * `sample` must be a live handle; `out` must be writable.
 */
enum Ar1cdStatus ar1cd_df_cdf(const struct Ar1cdLimitSample *sample, double z, double *out);

/**
 * Large-sample `C(1)` for an estimate `phi_obs` from `n` observations.
 *
 * # Safety
 * `sample` must be a live handle; `out` must be writable.
 */
enum Ar1cdStatus ar1cd_c_at_one(const struct Ar1cdLimitSample *sample,
                                double phi_obs,
                                size_t n,
                                double *out);

/**
 * # Safety
 * `sample` must come from [`ar1cd_df_sample`] and not be freed yet, or be NULL.
 */
void ar1cd_limit_sample_free(struct Ar1cdLimitSample *sample);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AR1CD_H */
