#ifndef MODESEL_H
#define MODESEL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ModeselStatus {
  MODESEL_STATUS_OK = 0,
  MODESEL_STATUS_NULL_POINTER = 1,
  MODESEL_STATUS_INVALID_UTF8 = 2,
  MODESEL_STATUS_INVALID_ARGUMENT = 3,
  MODESEL_STATUS_CONFIG = 4,
  MODESEL_STATUS_IO = 5,
  MODESEL_STATUS_CALIBRATION = 6,
  MODESEL_STATUS_SIMULATION = 7,
  MODESEL_STATUS_PANIC = 8,
} ModeselStatus;

/**
 * Opaque calibration handle.
 */
typedef struct ModeselCalibration ModeselCalibration;

/**
 * Opaque configuration handle.
 */
typedef struct ModeselConfig ModeselConfig;

/**
 * Per-run KPIs of one replication.
 */
typedef struct ModeselRunSummary {
  double throughput_bps;
  double ber;
  double latency_ms;
  double jitter_ms;
  double handover_count;
  double relayed_ratio;
  double delivered_ratio;
} ModeselRunSummary;

typedef struct ModeselAggregate {
  double mean;
  double ci_halfwidth;
  size_t n_runs;
} ModeselAggregate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next `modesel_*` call on the same thread.
 */
const char *modesel_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *modesel_version(void);

/**
 * New config holding the built-in defaults.
 *
 * # Safety
 * `out` must be a valid pointer to a writable handle slot.
 */
enum ModeselStatus modesel_config_new(struct ModeselConfig **out);

/**
 * Defaults overlaid with a `key = value` file. The environment is not read.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable handle slot.
 */
enum ModeselStatus modesel_config_load(const char *path, struct ModeselConfig **out);

/**
 * Sets one config key using the same syntax as the config file.
 *
 * # Safety
 * `cfg` must come from this library; `key` and `value` must be
 * NUL-terminated strings.
 */
enum ModeselStatus modesel_config_set(struct ModeselConfig *cfg,
                                      const char *key,
                                      const char *value);

/**
 * Writes the hex SHA-256 of the effective config into `buf`.
 *
 * # Safety
 * `cfg` must come from this library; `buf` must hold `len` bytes; `needed`
 * may be null.
 */
enum ModeselStatus modesel_config_hash(const struct ModeselConfig *cfg,
                                       char *buf,
                                       size_t len,
                                       size_t *needed);

/**
 * Writes the effective config in file syntax into `buf`.
 *
 * # Safety
 * As for [`modesel_config_hash`].
 */
enum ModeselStatus modesel_config_text(const struct ModeselConfig *cfg,
                                       char *buf,
                                       size_t len,
                                       size_t *needed);

/**
 * # Safety
 * `cfg` must come from this library and not be used afterwards; null is
 * ignored.
 */
void modesel_config_free(struct ModeselConfig *cfg);

/**
 * Static scores and ranks (LTE, NR, D2D) for `slice` under `cfg`.
 *
 * # Safety
 * `scores` and `ranks` must each point to 3 writable elements.
 */
enum ModeselStatus modesel_rank(const struct ModeselConfig *cfg,
                                const char *slice,
                                double *scores,
                                uint8_t *ranks);

/**
 * Reads a calibration file written by `modesel calibrate`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable handle slot.
 */
enum ModeselStatus modesel_calibration_load(const char *path, struct ModeselCalibration **out);

/**
 * Runs the LDPC calibration described by `cfg`. Slow at default settings.
 *
 * # Safety
 * `cfg` must come from this library and `out` be a writable handle slot.
 */
enum ModeselStatus modesel_calibration_generate(const struct ModeselConfig *cfg,
                                                struct ModeselCalibration **out);

/**
 * Saves a calibration in the text format read by
 * [`modesel_calibration_load`].
 *
 * # Safety
 * `calib` must come from this library; `path` must be NUL-terminated.
 */
enum ModeselStatus modesel_calibration_save(const struct ModeselCalibration *calib,
                                            const char *path);

/**
 * Interpolated BLER for `modulation` (qpsk, qam16, qam64, qam256).
 *
 * # Safety
 * `calib` must come from this library; `modulation` must be NUL-terminated;
 * `bler` must be writable.
 */
enum ModeselStatus modesel_calibration_bler(const struct ModeselCalibration *calib,
                                            const char *modulation,
                                            double snr_db,
                                            double *bler);

/**
 * # Safety
 * `calib` must come from this library and not be used afterwards; null is
 * ignored.
 */
void modesel_calibration_free(struct ModeselCalibration *calib);

/**
 * One replication of `selector` at the configured operating point.
 *
 * # Safety
 * Handles must come from this library; `selector` must be NUL-terminated;
 * `out` must be writable.
 */
enum ModeselStatus modesel_run(const struct ModeselConfig *cfg,
                               const struct ModeselCalibration *calib,
                               const char *selector,
                               uint64_t seed,
                               struct ModeselRunSummary *out);

/**
 * Runs the configured sweep and writes `results.csv`, the plot files and
 * the config echo into `out_dir`, like `modesel sweep`. `*rows` receives
 * the number of CSV data rows when not null.
 *
 * # Safety
 * Handles must come from this library; `out_dir` must be NUL-terminated.
 */
enum ModeselStatus modesel_sweep(const struct ModeselConfig *cfg,
                                 const struct ModeselCalibration *calib,
                                 const char *out_dir,
                                 size_t *rows);

/**
 * Mean and 95% CI half-width of `n` values (n >= 2).
 *
 * # Safety
 * `values` must point to `n` readable doubles; `out` must be writable.
 */
enum ModeselStatus modesel_aggregate(const double *values, size_t n, struct ModeselAggregate *out);

/**
 * Logistic map of an RSRP value, `1 / (1 + exp(-(rsrp - center) / scale))`.
 */
double modesel_sigmoid_norm(double rsrp_dbm, double center_dbm, double scale_db);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MODESEL_H */
