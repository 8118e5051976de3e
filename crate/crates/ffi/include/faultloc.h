#ifndef FAULTLOC_H
#define FAULTLOC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Length of the flattened 81x6 fault window.
 */
#define FL_WINDOW_LEN 486

/**
 * Result of every fallible call.
 */
typedef enum FlStatus {
  FL_STATUS_OK = 0,
  /**
   * Null pointer, bad length, unknown fault type or out-of-range value.
   */
  FL_STATUS_INVALID_ARGUMENT = 1,
  /**
   * File could not be read or written.
   */
  FL_STATUS_IO = 2,
  /**
   * Malformed COMTRADE, record, model or TOML input.
   */
  FL_STATUS_PARSE = 3,
  /**
   * Parameter estimation or Takagi evaluation failed.
   */
  FL_STATUS_ESTIMATION = 4,
  /**
   * Simulation failed.
   */
  FL_STATUS_SIMULATION = 5,
  /**
   * Training or prediction failed.
   */
  FL_STATUS_MODEL = 6,
  /**
   * Caller buffer too small; the required length was written.
   */
  FL_STATUS_BUFFER_TOO_SMALL = 7,
  /**
   * Internal panic caught at the boundary.
   */
  FL_STATUS_PANIC = 99,
} FlStatus;

typedef struct FlLine FlLine;

typedef struct FlModel FlModel;

typedef struct FlRecord FlRecord;

/**
 * Parameter estimate of one record. Impedances in ohm, angles in degrees.
 */
typedef struct FlEstimate {
  double zs_aerial_re;
  double zs_aerial_im;
  /**
   * 1 when the zero-mode impedance was estimated (grounded faults).
   */
  int32_t has_zs_zero;
  double zs_zero_re;
  double zs_zero_im;
  double loading_deg;
  double fia_deg;
  double rf_lower;
  double rf_upper;
  /**
   * Fault sample index at 80 samples per cycle.
   */
  uint64_t t_f_index;
  double meas_peak;
} FlEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *fl_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL
 * terminated, truncated to `cap`). Returns the full message length
 * without the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
size_t fl_last_error_message(char *buf, size_t cap);

/**
 * Loads a native record, or a COMTRADE pair when `path` ends in `.cfg`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum FlStatus fl_record_load(const char *path, struct FlRecord **out);

/**
 * Parses an in-memory COMTRADE `.cfg`/`.dat` pair.
 *
 * # Safety
 * Buffers must be valid for their lengths; `out` must be writable.
 */
enum FlStatus fl_record_parse_comtrade(const uint8_t *cfg,
                                       size_t cfg_len,
                                       const uint8_t *dat,
                                       size_t dat_len,
                                       struct FlRecord **out);

/**
 * # Safety
 * `rec` must be null or a handle from this library not yet freed.
 */
void fl_record_free(struct FlRecord *rec);

/**
 * Samples per channel, 0 for a null handle.
 *
 * # Safety
 * `rec` must be null or a live handle.
 */
size_t fl_record_len(const struct FlRecord *rec);

/**
 * Sample rate in Hz, 0 for a null handle.
 *
 * # Safety
 * `rec` must be null or a live handle.
 */
double fl_record_sample_rate(const struct FlRecord *rec);

/**
 * Copies channel `index` (0..3 voltages A-C, 3..6 currents A-C) into
 * `buf`. `*len` is always set to the channel length; a short buffer
 * returns `BufferTooSmall` without copying.
 *
 * # Safety
 * `buf` must be valid for `cap` doubles; `len` must be writable.
 */
enum FlStatus fl_record_channel(const struct FlRecord *rec,
                                size_t index,
                                double *buf,
                                size_t cap,
                                size_t *len);

/**
 * Fault window in physical units at 80 samples per cycle, rows
 * `[iA, iB, iC, uA, uB, uC]` after rotating to the canonical fault, with
 * the fault sample at `t_f_index` (from [`fl_estimate`]). `out` receives
 * `FL_WINDOW_LEN` doubles.
 *
 * # Safety
 * `out` must be valid for `FL_WINDOW_LEN` doubles.
 */
enum FlStatus fl_record_window(const struct FlRecord *rec,
                               const char *fault,
                               uint64_t t_f_index,
                               double *out);

/**
 * Parses a line description from TOML text.
 *
 * # Safety
 * `toml` must be NUL-terminated; `out` must be writable.
 */
enum FlStatus fl_line_from_toml(const char *toml, struct FlLine **out);

/**
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum FlStatus fl_line_load(const char *path, struct FlLine **out);

/**
 * # Safety
 * `line` must be null or a live handle.
 */
void fl_line_free(struct FlLine *line);

/**
 * Line length in km, 0 for a null handle.
 *
 * # Safety
 * `line` must be null or a live handle.
 */
double fl_line_length_km(const struct FlLine *line);

/**
 * Estimates system parameters from a record. `k_ff` and `margin_c` of 0
 * or less select the defaults (1.5 and 0.05).
 *
 * # Safety
 * Handles must be live; `fault` NUL-terminated; `out` writable.
 */
enum FlStatus fl_estimate(const struct FlRecord *rec,
                          const struct FlLine *line,
                          const char *fault,
                          double k_ff,
                          double margin_c,
                          struct FlEstimate *out);

/**
 * Simulates one fault event with default numerics (3 cycles before and 1
 * after the fault, 80 samples per cycle). Source impedances are
 * `{r1, x1, r0, x0}` in ohm.
 *
 * # Safety
 * Handles must be live; arrays valid for 4 doubles; `out` writable.
 */
enum FlStatus fl_simulate(const struct FlLine *line,
                          const char *fault,
                          double distance_km,
                          double rf_ohm,
                          double fia_deg,
                          double loading_deg,
                          const double (*zs_local)[4],
                          const double (*zs_remote)[4],
                          struct FlRecord **out);

/**
 * Takagi distance from the one-cycle phasors ending `time_ms` after the
 * detected fault instant. `k_ff` of 0 or less selects 1.5.
 *
 * # Safety
 * Handles must be live; `fault` NUL-terminated; `out_km` writable.
 */
enum FlStatus fl_takagi(const struct FlRecord *rec,
                        const struct FlLine *line,
                        const char *fault,
                        double time_ms,
                        double k_ff,
                        double *out_km);

/**
 * # Safety
 * `path` must be NUL-terminated; `out` writable.
 */
enum FlStatus fl_model_load(const char *path, struct FlModel **out);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
void fl_model_free(struct FlModel *model);

/**
 * Distance in km for a window in physical units (as from
 * [`fl_record_window`]); `len` must equal `FL_WINDOW_LEN`.
 *
 * # Safety
 * `window` must be valid for `len` doubles; `out_km` writable.
 */
enum FlStatus fl_model_predict(const struct FlModel *model,
                               const double *window,
                               size_t len,
                               double *out_km);

/**
 * Clarke transform of `n` samples of phases A, B, C into alpha, beta and
 * zero mode outputs.
 *
 * # Safety
 * Inputs and outputs must be valid for `n` doubles each.
 */
enum FlStatus fl_clarke_forward(const double *a,
                                const double *b,
                                const double *c,
                                size_t n,
                                double *alpha,
                                double *beta,
                                double *zero);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FAULTLOC_H */
