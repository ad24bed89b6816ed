#ifndef TRACELOC_H
#define TRACELOC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum TlStatus {
  TL_STATUS_OK = 0,
  /**
   * A required pointer was null.
   */
  TL_STATUS_NULL = 1,
  /**
   * An argument is out of range or not valid UTF-8.
   */
  TL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Bad configuration; the CLI exits with 1.
   */
  TL_STATUS_CONFIG = 3,
  /**
   * Missing or malformed input data; the CLI exits with 2.
   */
  TL_STATUS_DATA = 4,
  /**
   * An internal check failed; the CLI exits with 3.
   */
  TL_STATUS_INVARIANT = 5,
  /**
   * File system failure.
   */
  TL_STATUS_IO = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  TL_STATUS_PANIC = 7,
} TlStatus;

/**
 * Parsed run configuration.
 */
typedef struct TlConfig TlConfig;

/**
 * Metric reports of one run, one per composer.
 */
typedef struct TlReport TlReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Owned by the library.
 */
const char *tl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tl_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void tl_string_free(char *s);

/**
 * Loads a `key = value` config file. Relative paths resolve against its directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum TlStatus tl_config_load(const char *path, struct TlConfig **out);

/**
 * Overrides one config key, with the same names as the config file. `workdir` sets the output directory.
 *
 * # Safety
 * `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum TlStatus tl_config_set(struct TlConfig *cfg,
                            const char *key,
                            const char *value);

/**
 * Releases a config handle. Null is ignored.
 *
 * # Safety
 * `cfg` must come from [`tl_config_load`] and not have been freed.
 */
void tl_config_free(struct TlConfig *cfg);

/**
 * Runs the whole pipeline, writing artifacts to the workdir, and returns the reports.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a writable pointer.
 */
enum TlStatus tl_run(const struct TlConfig *cfg, struct TlReport **out);

/**
 * Number of composer reports.
 *
 * # Safety
 * `report` must be a live handle and `out` a writable pointer.
 */
enum TlStatus tl_report_count(const struct TlReport *report, size_t *out);

/**
 * Composer name of report `index`. The string lives as long as the handle.
 *
 * # Safety
 * `report` must be a live handle and `out` a writable pointer.
 */
enum TlStatus tl_report_composer(const struct TlReport *report, size_t index, const char **out);

/**
 * Aggregate `metric` (MAP, MRR, Top1, Top5, Top10) of report `index`.
 *
 * # Safety
 * `report` must be a live handle, `metric` a NUL-terminated string, `out` writable.
 */
enum TlStatus tl_report_metric(const struct TlReport *report,
                               size_t index,
                               const char *metric,
                               double *out);

/**
 * The full report as JSON. Free the string with [`tl_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` a writable pointer.
 */
enum TlStatus tl_report_to_json(const struct TlReport *report, char **out);

/**
 * Releases a report handle. Null is ignored.
 *
 * # Safety
 * `report` must come from [`tl_run`] and not have been freed.
 */
void tl_report_free(struct TlReport *report);

/**
 * Fixed-weight coefficients for trace, structure and history, in that order.
 *
 * # Safety
 * `out` must point to 3 writable doubles.
 */
enum TlStatus tl_fixed_coefficients(double a, double b, double *out);

/**
 * Contribution of one fix commit `age_days` old in a `window_days` window.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum TlStatus tl_bugcache_term(double age_days, double window_days, double *out);

/**
 * Trace scores for `n_files` files from `n_artifacts` related artifacts.
 *
 * Artifact `i` has similarity `weights[i]` and fixed the files
 * `file_idx[offsets[i] .. offsets[i + 1]]`; `offsets` has `n_artifacts + 1`
 * entries starting at 0. Repeated indices within one artifact count once.
 * Files reached by no artifact score 0.
 *
 * # Safety
 * Arrays must have the lengths above and `out` room for `n_files` doubles.
 */
enum TlStatus tl_trace_score(const double *weights,
                             const size_t *offsets,
                             const uint32_t *file_idx,
                             size_t n_artifacts,
                             size_t n_files,
                             double *out);

/**
 * Average precision of a ranking given as relevance flags in rank order.
 *
 * `truth_size` counts every buggy file, retrieved or not, and must be positive.
 *
 * # Safety
 * `relevant` must hold `n` bytes and `out` be writable.
 */
enum TlStatus tl_average_precision(const uint8_t *relevant,
                                   size_t n,
                                   size_t truth_size,
                                   double *out);

/**
 * Fuses three component scores per candidate with an unsupervised composer.
 *
 * `kind` is a composer name such as `fixed_weight`, `combsum` or `borda`.
 * On success `out_order` holds candidate indices from best to worst.
 *
 * # Safety
 * `paths` must hold `n` NUL-terminated strings, `r`, `h`, `s` and `out_order` `n` elements.
 */
enum TlStatus tl_fuse(const char *kind,
                      const char *const *paths,
                      const double *r,
                      const double *h,
                      const double *s,
                      size_t n,
                      size_t *out_order);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRACELOC_H */
