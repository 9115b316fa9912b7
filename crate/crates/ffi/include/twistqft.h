#ifndef TWISTQFT_H
#define TWISTQFT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call. Values 1 to 3 match the CLI exit codes.
 */
typedef enum TqStatus {
  TQ_STATUS_OK = 0,
  TQ_STATUS_INVALID_INPUT = 1,
  TQ_STATUS_NUMERICAL = 2,
  TQ_STATUS_IO = 3,
  TQ_STATUS_NULL_POINTER = 4,
  TQ_STATUS_PANIC = 5,
} TqStatus;

/**
 * Field stored per spatial Fourier mode.
 */
typedef struct TqField TqField;

/**
 * Log-uniform time grid times a periodic spatial lattice.
 */
typedef struct TqGrid TqGrid;

/**
 * Truncated power series with exact rational coefficients.
 */
typedef struct TqSeries TqSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes of the last error message on this thread, without the terminator.
 */
size_t tq_last_error_length(void);

/**
 * Copies the last error message into `buf` (NUL-terminated, truncated to
 * `len - 1` bytes). Returns the number of bytes written before the terminator.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
size_t tq_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tq_version(void);

/**
 * Order-`order` expansion of `sec(u)^{1/2}` (`inverse` false) or `cos(u)^{1/2}`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TqStatus tq_series_sqrt_sec(size_t order, bool inverse, struct TqSeries **out);

/**
 * Truncated product of two series of equal order.
 *
 * # Safety
 * Pointers must come from this library or be null.
 */
enum TqStatus tq_series_mul(const struct TqSeries *a,
                            const struct TqSeries *b,
                            struct TqSeries **out);

/**
 * Truncation order, or 0 for null.
 *
 * # Safety
 * `s` must come from this library or be null.
 */
size_t tq_series_order(const struct TqSeries *s);

/**
 * Coefficient `n`, rounded to the nearest double.
 *
 * # Safety
 * `s` must come from this library; `out` must be valid.
 */
enum TqStatus tq_series_coefficient(const struct TqSeries *s, size_t n, double *out);

/**
 * Returns 1 if every coefficient is exactly zero, 0 otherwise, -1 for null.
 *
 * # Safety
 * `s` must come from this library or be null.
 */
int32_t tq_series_is_zero(const struct TqSeries *s);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void tq_series_free(struct TqSeries *s);

/**
 * Grid with `nt` log-uniform times in `[t_min, t_max]` and an
 * `n[0] x n[1] x n[2]` periodic box of side lengths `len`.
 *
 * # Safety
 * `n` and `len` must point to three elements; `out` must be valid.
 */
enum TqStatus tq_grid_new(double t_min,
                          double t_max,
                          size_t nt,
                          const size_t *n,
                          const double *len,
                          struct TqGrid **out);

/**
 * Number of position samples, `nt * n[0] * n[1] * n[2]`.
 *
 * # Safety
 * `g` must come from this library or be null.
 */
size_t tq_grid_samples(const struct TqGrid *g);

/**
 * # Safety
 * `g` must come from this library and not be used afterwards.
 */
void tq_grid_free(struct TqGrid *g);

/**
 * Field from real position samples laid out `[time][x3][x2][x1]`, x1 fastest.
 *
 * # Safety
 * `samples` must hold `len` doubles; `out` must be valid.
 */
enum TqStatus tq_field_from_position(const struct TqGrid *g,
                                     const double *samples,
                                     size_t len,
                                     struct TqField **out);

/**
 * Writes the real position-space samples into `buf` (same layout as input).
 *
 * # Safety
 * `buf` must hold `len` doubles.
 */
enum TqStatus tq_field_to_position(const struct TqField *f, double *buf, size_t len);

/**
 * Retarded (`retarded` true) or advanced Green operator applied to `f`.
 *
 * # Safety
 * `f` must come from this library; `out` must be valid.
 */
enum TqStatus tq_field_green(const struct TqField *f,
                             double xi,
                             bool retarded,
                             struct TqField **out);

/**
 * Wave operator applied to `f`.
 *
 * # Safety
 * `f` must come from this library; `out` must be valid.
 */
enum TqStatus tq_field_wave(const struct TqField *f, double xi, struct TqField **out);

/**
 * Discrete L2 norm, or NaN for null.
 *
 * # Safety
 * `f` must come from this library or be null.
 */
double tq_field_norm(const struct TqField *f);

/**
 * `|a - b| / |b|` in the discrete L2 norm.
 *
 * # Safety
 * Both fields must come from this library; `out` must be valid.
 */
enum TqStatus tq_field_relative_distance(const struct TqField *a,
                                         const struct TqField *b,
                                         double *out);

/**
 * # Safety
 * `f` must come from this library and not be used afterwards.
 */
void tq_field_free(struct TqField *f);

/**
 * Symplectic pairing of two fields; deformed with parameter `lambda` when
 * it is positive.
 *
 * # Safety
 * Both fields must come from this library; `out` must be valid.
 */
enum TqStatus tq_symplectic(const struct TqField *a,
                            const struct TqField *b,
                            double lambda,
                            double xi,
                            double *out);

/**
 * Per-mode commutator kernel at `(t, tau)` for wavenumber `k`.
 *
 * # Safety
 * `out` must be valid.
 */
enum TqStatus tq_mode_kernel(double t, double tau, double k, double xi, double *out);

/**
 * Runs a CLI command in-process. `config` is optional `key = value` text;
 * `out_dir` optionally overrides the output directory.
 *
 * # Safety
 * `command` must be a NUL-terminated string; the others NUL-terminated or null.
 */
enum TqStatus tq_run(const char *command, const char *config, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWISTQFT_H */
