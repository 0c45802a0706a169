#ifndef LANGEVIN_MIMO_H
#define LANGEVIN_MIMO_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LmStatus {
  LM_STATUS_OK = 0,
  LM_STATUS_NULL_POINTER = 1,
  LM_STATUS_INVALID_ARGUMENT = 2,
  LM_STATUS_NUMERICAL = 3,
  LM_STATUS_PANIC = 4,
} LmStatus;

/**
 * Channel realization handle; holds the SVD and noise variance.
 */
typedef struct LmChannel LmChannel;

/**
 * Sampler configuration handle.
 */
typedef struct LmConfig LmConfig;

/**
 * QAM constellation handle.
 */
typedef struct LmConstellation LmConstellation;

/**
 * Plain-data view of a sampler configuration.
 */
typedef struct LmLangevinParams {
  size_t num_levels;
  size_t steps_per_level;
  size_t num_trajectories;
  double step_size;
  double friction;
  double temperature;
  double mass_scalar;
  double sigma_first;
  double sigma_last;
} LmLangevinParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or an empty string.
 * Valid until the next call into this library on the same thread.
 */
const char *lm_last_error(void);

/**
 * Noise variance `σ0²` for an SNR in dB.
 */
double lm_snr_to_noise_var(double snr_db, size_t nu, size_t nr);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum LmStatus lm_constellation_qam(size_t order, struct LmConstellation **out);

/**
 * # Safety
 * `c` must be null or a handle from [`lm_constellation_qam`] not yet freed.
 */
void lm_constellation_free(struct LmConstellation *c);

/**
 * Draws a Kronecker-correlated Rayleigh channel with exponential correlation
 * `rho` at both ends.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum LmStatus lm_channel_kronecker(size_t nr,
                                   size_t nu,
                                   double rho,
                                   double noise_var,
                                   uint64_t seed,
                                   struct LmChannel **out);

/**
 * Channel from row-major `nr × nu` real and imaginary parts.
 *
 * # Safety
 * `re` and `im` must each point to `nr * nu` doubles; `out` must be valid
 * for writes.
 */
enum LmStatus lm_channel_from_parts(size_t nr,
                                    size_t nu,
                                    const double *re,
                                    const double *im,
                                    double noise_var,
                                    struct LmChannel **out);

/**
 * # Safety
 * `ch` must be null or a live channel handle.
 */
void lm_channel_free(struct LmChannel *ch);

/**
 * # Safety
 * `ch` must be a live channel handle; `nr` and `nu` must be valid for writes.
 */
enum LmStatus lm_channel_dims(const struct LmChannel *ch, size_t *nr, size_t *nu);

/**
 * Named preset: "low1", "low2" or "high".
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum LmStatus lm_config_preset(const char *name, struct LmConfig **out);

/**
 * Validated configuration from explicit parameters.
 *
 * # Safety
 * `params` must point to a valid struct; `out` must be valid for writes.
 */
enum LmStatus lm_config_new(const struct LmLangevinParams *params, struct LmConfig **out);

/**
 * # Safety
 * `cfg` must be a live handle; `params` must be valid for writes.
 */
enum LmStatus lm_config_get(const struct LmConfig *cfg, struct LmLangevinParams *params);

/**
 * # Safety
 * `cfg` must be null or a live handle.
 */
void lm_config_free(struct LmConfig *cfg);

/**
 * Annealed underdamped Langevin detection. `seed` fixes the chains' noise.
 *
 * # Safety
 * Handles must be live; `y_re`/`y_im` hold `nr` doubles and `x_re`/`x_im`
 * have room for `nu`. `residual` may be null.
 */
enum LmStatus lm_detect_langevin(const struct LmChannel *ch,
                                 const struct LmConstellation *c,
                                 const struct LmConfig *cfg,
                                 uint64_t seed,
                                 const double *y_re,
                                 const double *y_im,
                                 double *x_re,
                                 double *x_im,
                                 double *residual);

/**
 * Annealed overdamped Langevin detection.
 *
 * # Safety
 * As for [`lm_detect_langevin`].
 */
enum LmStatus lm_detect_overdamped(const struct LmChannel *ch,
                                   const struct LmConstellation *c,
                                   const struct LmConfig *cfg,
                                   uint64_t seed,
                                   const double *y_re,
                                   const double *y_im,
                                   double *x_re,
                                   double *x_im,
                                   double *residual);

/**
 * Zero-forcing detection.
 *
 * # Safety
 * As for [`lm_detect_langevin`].
 */
enum LmStatus lm_detect_zf(const struct LmChannel *ch,
                           const struct LmConstellation *c,
                           const double *y_re,
                           const double *y_im,
                           double *x_re,
                           double *x_im,
                           double *residual);

/**
 * Linear MMSE detection.
 *
 * # Safety
 * As for [`lm_detect_langevin`].
 */
enum LmStatus lm_detect_mmse(const struct LmChannel *ch,
                             const struct LmConstellation *c,
                             const double *y_re,
                             const double *y_im,
                             double *x_re,
                             double *x_im,
                             double *residual);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LANGEVIN_MIMO_H */
