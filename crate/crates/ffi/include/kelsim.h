#ifndef KELSIM_H
#define KELSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every entry point.
 */
typedef enum KelsimStatus {
  KELSIM_STATUS_OK = 0,
  KELSIM_STATUS_NULL_POINTER = 1,
  KELSIM_STATUS_CONFIG = 2,
  KELSIM_STATUS_NUMERIC = 3,
  KELSIM_STATUS_DOMAIN = 4,
  KELSIM_STATUS_PRECONDITION = 5,
  KELSIM_STATUS_DEGENERATE = 6,
  KELSIM_STATUS_CONSISTENCY = 7,
  KELSIM_STATUS_EVALUATION = 8,
  KELSIM_STATUS_IO = 9,
  KELSIM_STATUS_INVALID_UTF8 = 10,
  KELSIM_STATUS_OUT_OF_RANGE = 11,
  KELSIM_STATUS_PANIC = 12,
} KelsimStatus;

/**
 * Regime codes reported by [`kelsim_classify_regime`].
 */
typedef enum KelsimRegime {
  KELSIM_REGIME_NOT_COVERED = 0,
  KELSIM_REGIME_BOUNDED_CASE_I = 1,
  KELSIM_REGIME_BOUNDED_CASE_II = 2,
} KelsimRegime;

/**
 * Verdict codes reported by [`kelsim_outcome_verdict`].
 */
typedef enum KelsimVerdict {
  KELSIM_VERDICT_COMPLETED_BOUNDED = 0,
  KELSIM_VERDICT_NUMERICAL_BLOWUP = 1,
  KELSIM_VERDICT_ABORTED = 2,
} KelsimVerdict;

/**
 * Opaque parsed configuration.
 */
typedef struct KelsimConfig KelsimConfig;

/**
 * Opaque simulation result.
 */
typedef struct KelsimOutcome KelsimOutcome;

typedef struct KelsimModelParams {
  uint32_t dim;
  double chi;
  double mu;
  double c_d;
  double m_exp;
  double lambda0;
  double c_gn;
} KelsimModelParams;

/**
 * Scalar diagnostics of one trajectory sample.
 */
typedef struct KelsimRecord {
  double t;
  double dt;
  double mass;
  double linf_u;
  double min_u;
  double l2_u;
  double l2_v;
} KelsimRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *kelsim_last_error_message(void);

/**
 * Fills `out` with the library defaults.
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum KelsimStatus kelsim_default_params(struct KelsimModelParams *out);

/**
 * Critical exponent. `*unconstrained` is set when every `m` qualifies, in
 * which case `*out` is negative infinity.
 *
 * # Safety
 * All pointers must be NULL or valid.
 */
enum KelsimStatus kelsim_critical_exponent(const struct KelsimModelParams *params,
                                           double *out,
                                           bool *unconstrained);

/**
 * Diffusion-constant threshold for the borderline exponent.
 *
 * # Safety
 * All pointers must be NULL or valid.
 */
enum KelsimStatus kelsim_cd_threshold(const struct KelsimModelParams *params,
                                      double u0_l1,
                                      double *out);

/**
 * # Safety
 * All pointers must be NULL or valid.
 */
enum KelsimStatus kelsim_classify_regime(const struct KelsimModelParams *params,
                                         double u0_l1,
                                         enum KelsimRegime *out);

/**
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum KelsimStatus kelsim_b1_constant(double p, double *out);

/**
 * # Safety
 * Output pointers must be NULL or valid for writes.
 */
enum KelsimStatus kelsim_lemma_min(double p,
                                   double chi,
                                   double lambda0,
                                   double *minimizer,
                                   double *minimum);

/**
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum KelsimStatus kelsim_h_function(double p,
                                    double c_d,
                                    double c_gn,
                                    double u0_l1,
                                    uint32_t dim,
                                    double lambda0,
                                    double chi,
                                    double *out);

/**
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum KelsimStatus kelsim_find_p0(double c_d,
                                 double c_gn,
                                 double u0_l1,
                                 uint32_t dim,
                                 double lambda0,
                                 double chi,
                                 double *out);

/**
 * Parses a `key = value` configuration. On success `*out` owns a handle
 * to release with [`kelsim_config_free`].
 *
 * # Safety
 * `text` must be NULL or a NUL-terminated string; `out` NULL or valid.
 */
enum KelsimStatus kelsim_config_parse(const char *text, struct KelsimConfig **out);

/**
 * # Safety
 * `config` must be NULL or a handle from [`kelsim_config_parse`] not yet freed.
 */
void kelsim_config_free(struct KelsimConfig *config);

/**
 * # Safety
 * `config` must be a live handle; `out` NULL or valid.
 */
enum KelsimStatus kelsim_config_params(const struct KelsimConfig *config,
                                       struct KelsimModelParams *out);

/**
 * Runs the configured simulation. The returned outcome handle must be
 * released with [`kelsim_outcome_free`].
 *
 * # Safety
 * `config` must be a live handle; `out` NULL or valid.
 */
enum KelsimStatus kelsim_simulate(const struct KelsimConfig *config, struct KelsimOutcome **out);

/**
 * # Safety
 * `outcome` must be NULL or a handle from [`kelsim_simulate`] not yet freed.
 */
void kelsim_outcome_free(struct KelsimOutcome *outcome);

/**
 * Verdict of a run; `*t_detect` is the detection time for blow-up and the
 * final time otherwise.
 *
 * # Safety
 * `outcome` must be a live handle; other pointers NULL or valid.
 */
enum KelsimStatus kelsim_outcome_verdict(const struct KelsimOutcome *outcome,
                                         enum KelsimVerdict *verdict,
                                         double *t_detect);

/**
 * Number of diagnostics records, or 0 for a NULL handle.
 *
 * # Safety
 * `outcome` must be NULL or a live handle.
 */
size_t kelsim_outcome_record_count(const struct KelsimOutcome *outcome);

/**
 * # Safety
 * `outcome` must be a live handle; `out` NULL or valid.
 */
enum KelsimStatus kelsim_outcome_record(const struct KelsimOutcome *outcome,
                                        size_t index,
                                        struct KelsimRecord *out);

/**
 * Copies the final density into `buf` (capacity `len`); `*written`
 * receives the cell count. Fails with `OutOfRange` if `len` is too small.
 *
 * # Safety
 * `buf` must be valid for `len` writes; other pointers NULL or valid.
 */
enum KelsimStatus kelsim_outcome_final_u(const struct KelsimOutcome *outcome,
                                         double *buf,
                                         size_t len,
                                         size_t *written);

/**
 * Writes the time-series CSV of a run.
 *
 * # Safety
 * `outcome` must be a live handle; `path` a NUL-terminated string.
 */
enum KelsimStatus kelsim_outcome_write_timeseries(const struct KelsimOutcome *outcome,
                                                  const char *path);

/**
 * Runs the configured sweep, writes the phase CSV to `csv_path` and
 * reports the number of cells where theory and simulation disagree.
 *
 * # Safety
 * `config` must be a live handle; `csv_path` a NUL-terminated string;
 * `disagreements` NULL or valid.
 */
enum KelsimStatus kelsim_sweep(const struct KelsimConfig *config,
                               const char *csv_path,
                               size_t *disagreements);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KELSIM_H */
