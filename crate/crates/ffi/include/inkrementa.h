#ifndef INKREMENTA_H
#define INKREMENTA_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define INK_NORM_L1 1

#define INK_NORM_L2 2

typedef enum InkStatus {
  INK_STATUS_OK = 0,
  INK_STATUS_NULL_POINTER = 1,
  INK_STATUS_INVALID_UTF8 = 2,
  /**
   * Bad configuration, unknown key or incompatible file version.
   */
  INK_STATUS_CONFIG = 3,
  /**
   * Missing file, unparsable data or an invalid class mapping.
   */
  INK_STATUS_DATA = 4,
  /**
   * Mismatched dimensions.
   */
  INK_STATUS_SHAPE = 5,
  /**
   * Any other argument or state error.
   */
  INK_STATUS_INVALID = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  INK_STATUS_PANIC = 7,
} InkStatus;

/**
 * Opaque trained model.
 */
typedef struct InkModel InkModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the next call.
 */
const char *ink_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ink_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed at most once.
 */
void ink_string_free(char *s);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum InkStatus ink_model_load(const char *path, struct InkModel **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum InkStatus ink_model_from_json(const char *json, struct InkModel **out);

/**
 * Serializes the model; free the result with [`ink_string_free`].
 *
 * # Safety
 * `model` must be a live handle and `out` a writable pointer.
 */
enum InkStatus ink_model_to_json(const struct InkModel *model, char **out);

/**
 * # Safety
 * `model` must be a live handle and `path` a NUL-terminated string.
 */
enum InkStatus ink_model_save(const struct InkModel *model, const char *path);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void ink_model_free(struct InkModel *model);

/**
 * Number of classes, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t ink_model_num_classes(const struct InkModel *model);

/**
 * Input dimension, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t ink_model_input_dim(const struct InkModel *model);

/**
 * # Safety
 * `x` must point to `len` doubles and `out_class` must be writable.
 */
enum InkStatus ink_model_predict(const struct InkModel *model,
                                 const double *x,
                                 size_t len,
                                 size_t *out_class);

/**
 * Writes `num_classes` logits into `out`, which holds `out_len` doubles.
 *
 * # Safety
 * `x` must point to `len` doubles and `out` to `out_len` writable doubles.
 */
enum InkStatus ink_model_logits(const struct InkModel *model,
                                const double *x,
                                size_t len,
                                double *out,
                                size_t out_len);

/**
 * Runs a scenario given as JSON config text and returns the report JSON.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out_report` writable.
 */
enum InkStatus ink_run_scenario(const char *config_json, char **out_report);

/**
 * # Safety
 * `out` must be writable.
 */
enum InkStatus ink_accn(size_t n, double accuracy, double *out);

/**
 * Aligns a row-major `(u + v) x cols` head in place. `norm` is `INK_NORM_L1` or `INK_NORM_L2`.
 *
 * # Safety
 * `head` must point to `(u + v) * cols` writable doubles.
 */
enum InkStatus ink_weight_align(double *head, size_t u, size_t v, size_t cols, uint32_t norm);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INKREMENTA_H */
