#ifndef ANHOSC_H
#define ANHOSC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes shared by all entry points.
 */
typedef enum AnhoscStatus {
  ANHOSC_STATUS_OK = 0,
  ANHOSC_STATUS_INVALID_ARGUMENT = 1,
  ANHOSC_STATUS_SINGULAR = 2,
  ANHOSC_STATUS_ACCURACY = 3,
  ANHOSC_STATUS_NULL_POINTER = 5,
  ANHOSC_STATUS_PANIC = 6,
} AnhoscStatus;

/**
 * Opaque model: parameters plus truncation policy.
 */
typedef struct AnhoscModel AnhoscModel;

/**
 * Factors of the propagator; `value` is their combination.
 */
typedef struct AnhoscPropagator {
  double harmonic_prefactor;
  double harmonic_exponent;
  double universal_exponent;
  double polynomial_factor;
  double value;
} AnhoscPropagator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a model with the default truncation policy. `*out` is set only on success.
 *
 * # Safety
 * `out` must be null or point to writable storage for one pointer.
 */
enum AnhoscStatus anhosc_model_new(double a,
                                   double b,
                                   double c,
                                   double beta,
                                   double x_f,
                                   struct AnhoscModel **out);

/**
 * Releases a model; null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from [`anhosc_model_new`] not yet freed.
 */
void anhosc_model_free(struct AnhoscModel *model);

/**
 * Moves the endpoint x_f.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
enum AnhoscStatus anhosc_model_set_endpoint(struct AnhoscModel *model, double x_f);

/**
 * Sets Poincaré order, highest correction order, relative quadrature tolerance and series cutoff.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
enum AnhoscStatus anhosc_model_set_truncation(struct AnhoscModel *model,
                                              uint32_t order,
                                              uint32_t p_max,
                                              double rel_tol,
                                              uint32_t cutoff);

/**
 * Evaluates the corrected fixed-origin propagator.
 *
 * # Safety
 * `model` must be null or a live handle; `out` must be null or writable.
 */
enum AnhoscStatus anhosc_propagate(const struct AnhoscModel *model, struct AnhoscPropagator *out);

/**
 * `I_0(0)/Q⁴(β)`, the coefficient of `−a·x_f⁴` in the universal exponent.
 *
 * # Safety
 * `model` must be null or a live handle; `out` must be null or writable.
 */
enum AnhoscStatus anhosc_universal_ratio(const struct AnhoscModel *model, double *out);

/**
 * Zero-momentum x-transform of the propagator with the universal exponent.
 *
 * # Safety
 * `model` must be null or a live handle; `out` must be null or writable.
 */
enum AnhoscStatus anhosc_x_transform(const struct AnhoscModel *model, double *out);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated, truncated to `len`).
 * Returns the full message length without the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t anhosc_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *anhosc_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ANHOSC_H */
