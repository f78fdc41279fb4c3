#ifndef QBATTERY_H
#define QBATTERY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QbColumn {
  QB_COLUMN_TIME = 0,
  QB_COLUMN_RE_A = 1,
  QB_COLUMN_IM_A = 2,
  QB_COLUMN_RE_B = 3,
  QB_COLUMN_IM_B = 4,
  QB_COLUMN_ENERGY_A = 5,
  QB_COLUMN_ENERGY_B = 6,
  QB_COLUMN_POWER_B = 7,
} QbColumn;

typedef enum QbField {
  QB_FIELD_ENERGY_PEAK = 0,
  QB_FIELD_POWER_PEAK = 1,
} QbField;

typedef enum QbMethod {
  QB_METHOD_ODE = 0,
  QB_METHOD_CLOSED_FORM = 1,
} QbMethod;

typedef enum QbRamp {
  QB_RAMP_POWER_LAW = 0,
  QB_RAMP_CONSTANT = 1,
  QB_RAMP_STEP = 2,
} QbRamp;

typedef enum QbRowStatus {
  QB_ROW_STATUS_OK = 0,
  QB_ROW_STATUS_NO_PEAK = 1,
  QB_ROW_STATUS_REGIME = 2,
  QB_ROW_STATUS_ERROR = 3,
} QbRowStatus;

typedef enum QbStatus {
  QB_STATUS_OK = 0,
  QB_STATUS_NULL_POINTER = 1,
  QB_STATUS_DOMAIN = 2,
  QB_STATUS_UNSUPPORTED = 3,
  QB_STATUS_REGIME = 4,
  QB_STATUS_NUMERICAL = 5,
  QB_STATUS_SWEEP = 6,
  QB_STATUS_FIT = 7,
  QB_STATUS_CUTOFF = 8,
  QB_STATUS_CONFIG = 9,
  QB_STATUS_IO = 10,
  QB_STATUS_NOT_FOUND = 11,
  QB_STATUS_BAD_LENGTH = 12,
  QB_STATUS_PANIC = 13,
} QbStatus;

// Rows of a quench-time sweep.
typedef struct QbSweep QbSweep;

// Integrated trajectory with its energy trace.
typedef struct QbTrace QbTrace;

typedef struct QbSystemParams {
  double omega0;
  double drive;
  double gamma;
} QbSystemParams;

// `r` is read only for `QB_RAMP_POWER_LAW`.
typedef struct QbProtocol {
  double g_f;
  double tau_q;
  enum QbRamp ramp;
  double r;
} QbProtocol;

typedef struct QbPeak {
  double t_m;
  double e_bm;
  double p_bm;
} QbPeak;

typedef struct QbSweepRow {
  double tau_q;
  double t_m;
  double e_bm;
  double p_bm;
  enum QbRowStatus status;
} QbSweepRow;

typedef struct QbFit {
  double slope;
  double intercept;
  double slope_stderr;
  double r_squared;
  size_t n_points;
} QbFit;

typedef struct QbPeakPrediction {
  double theta_m;
  double t_m;
  double e_bm;
  double p_bm;
  double k;
} QbPeakPrediction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next `qb_` call on the same thread.
const char *qb_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *qb_version(void);

// Integrate the charging dynamics on `n_out` uniform samples of
// `[0, horizon]`. A non-positive `horizon` selects the default.
//
// # Safety
// `params` and `protocol` must point to valid structs and `out` to writable
// storage for one pointer.
enum QbStatus qb_simulate(const struct QbSystemParams *params,
                          const struct QbProtocol *protocol,
                          double horizon,
                          size_t n_out,
                          double tol,
                          struct QbTrace **out);

// Number of samples in `trace`, or 0 for a null handle.
//
// # Safety
// `trace` must be null or a handle from [`qb_simulate`].
size_t qb_trace_len(const struct QbTrace *trace);

// Copy one column into `dst`, which must hold exactly `len` values.
//
// # Safety
// `trace` must be a live handle and `dst` must be valid for `len` writes.
enum QbStatus qb_trace_copy_column(const struct QbTrace *trace,
                                   enum QbColumn column,
                                   double *dst,
                                   size_t len);

// First battery maximum. `QB_STATUS_NOT_FOUND` when the trace has none.
//
// # Safety
// `trace` must be a live handle and `peak` writable.
enum QbStatus qb_trace_peak(const struct QbTrace *trace, struct QbPeak *peak);

// Release a trace. Null is ignored.
//
// # Safety
// `trace` must be null or a handle from [`qb_simulate`] not yet freed.
void qb_trace_free(struct QbTrace *trace);

// Peak energy and power for each quench time in `grid[0..n]` (ascending).
// `jobs = 0` uses all cores; results do not depend on it.
//
// # Safety
// `grid` must be valid for `n` reads and `out` writable.
enum QbStatus qb_sweep(const struct QbSystemParams *params,
                       const struct QbProtocol *protocol,
                       const double *grid,
                       size_t n,
                       enum QbMethod method,
                       double tol,
                       size_t jobs,
                       struct QbSweep **out);

// Number of rows in `sweep`, or 0 for a null handle.
//
// # Safety
// `sweep` must be null or a handle from [`qb_sweep`].
size_t qb_sweep_len(const struct QbSweep *sweep);

// # Safety
// `sweep` must be a live handle and `row` writable.
enum QbStatus qb_sweep_row(const struct QbSweep *sweep, size_t index, struct QbSweepRow *row);

// Log-log least-squares fit over `[lo, hi]`.
//
// # Safety
// `sweep` must be a live handle and `fit` writable.
enum QbStatus qb_sweep_fit(const struct QbSweep *sweep,
                           enum QbField field,
                           double lo,
                           double hi,
                           struct QbFit *fit);

// Quench time of the interior power maximum; `QB_STATUS_NOT_FOUND` when
// the power is monotone over the grid.
//
// # Safety
// `sweep` must be a live handle and `tau_q` writable.
enum QbStatus qb_sweep_rolloff(const struct QbSweep *sweep, double *tau_q);

// Release a sweep. Null is ignored.
//
// # Safety
// `sweep` must be null or a handle from [`qb_sweep`] not yet freed.
void qb_sweep_free(struct QbSweep *sweep);

// # Safety
// `out` must be writable.
enum QbStatus qb_theta_m(double r, double *out);

// # Safety
// Pointers must be valid.
enum QbStatus qb_peak_prediction(const struct QbSystemParams *params,
                                 const struct QbProtocol *protocol,
                                 struct QbPeakPrediction *out);

// Battery energy during a power-law ramp, `0 <= t <= tau_q`.
//
// # Safety
// Pointers must be valid.
enum QbStatus qb_energy_quench_closed(const struct QbSystemParams *params,
                                      const struct QbProtocol *protocol,
                                      double t,
                                      double *out);

// # Safety
// Pointers must be valid.
enum QbStatus qb_charger_energy_decoupled(const struct QbSystemParams *params,
                                          double t,
                                          double *out);

// # Safety
// `out` must be writable.
enum QbStatus qb_optimal_tauq_step(double gamma, double *out);

// `∫₁^∞ u^(-alpha) e^(ixu) du` as real and imaginary parts, `0 <= alpha < 1`.
//
// # Safety
// `re` and `im` must be writable.
enum QbStatus qb_gen_exp_integral(double alpha, double x, double *re, double *im);

// # Safety
// `c` and `s` must be writable.
enum QbStatus qb_fresnel(double z, double *c, double *s);

// # Safety
// `out` must be writable.
enum QbStatus qb_lambert_w_minus1(double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QBATTERY_H */
