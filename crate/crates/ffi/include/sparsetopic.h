#ifndef SPARSETOPIC_H
#define SPARSETOPIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SparsetopicStatus {
  SPARSETOPIC_STATUS_OK = 0,
  SPARSETOPIC_STATUS_NULL_POINTER = 1,
  SPARSETOPIC_STATUS_INVALID_ARGUMENT = 2,
  SPARSETOPIC_STATUS_IO = 3,
  SPARSETOPIC_STATUS_BAD_CHECKPOINT = 4,
  SPARSETOPIC_STATUS_UNSUPPORTED_VERSION = 5,
  SPARSETOPIC_STATUS_NUMERIC = 6,
  SPARSETOPIC_STATUS_BUFFER_TOO_SMALL = 7,
  SPARSETOPIC_STATUS_PANIC = 8,
} SparsetopicStatus;

/**
 * A loaded model.
 */
typedef struct SparsetopicModel SparsetopicModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads a checkpoint. On success `*out` receives a handle that must be
 * released with [`sparsetopic_model_free`].
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SparsetopicStatus sparsetopic_model_load(const char *path, struct SparsetopicModel **out);

/**
 * Releases a model handle. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void sparsetopic_model_free(struct SparsetopicModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum SparsetopicStatus sparsetopic_model_num_topics(const struct SparsetopicModel *model,
                                                    size_t *out);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum SparsetopicStatus sparsetopic_model_vocab_size(const struct SparsetopicModel *model,
                                                    size_t *out);

/**
 * Looks up the id of `term`. Unknown terms give `InvalidArgument`.
 *
 * # Safety
 * `model` must be a live handle, `term` NUL-terminated and `out` writable.
 */
enum SparsetopicStatus sparsetopic_model_term_id(const struct SparsetopicModel *model,
                                                 const char *term,
                                                 size_t *out);

/**
 * Copies term `id` into `buf` as a NUL-terminated string. `*len` receives
 * the term's byte length without the terminator; if `buf_len` is too small
 * nothing is copied and `BufferTooSmall` is returned.
 *
 * # Safety
 * `model` must be a live handle, `buf` writable for `buf_len` bytes and
 * `len` writable.
 */
enum SparsetopicStatus sparsetopic_model_term(const struct SparsetopicModel *model,
                                              size_t id,
                                              char *buf,
                                              size_t buf_len,
                                              size_t *len);

/**
 * Infers topic proportions of the document given by parallel arrays of
 * term ids and counts. `theta` must hold `num_topics` values; inactive
 * topics receive exactly 0.
 *
 * # Safety
 * `term_ids` and `counts` must be readable for `n` values, `theta`
 * writable for `theta_len`.
 */
enum SparsetopicStatus sparsetopic_model_infer_theta(const struct SparsetopicModel *model,
                                                     const uint32_t *term_ids,
                                                     const uint32_t *counts,
                                                     size_t n,
                                                     double *theta,
                                                     size_t theta_len);

/**
 * Writes the `n` highest-weighted term ids of `topic` and their weights.
 * `n` larger than the vocabulary is an error.
 *
 * # Safety
 * `ids` and `weights` must be writable for `n` values.
 */
enum SparsetopicStatus sparsetopic_model_top_words(const struct SparsetopicModel *model,
                                                   size_t topic,
                                                   size_t n,
                                                   size_t *ids,
                                                   double *weights);

/**
 * Euclidean projection of `x` onto the probability simplex.
 *
 * # Safety
 * `x` must be readable and `out` writable for `n` values.
 */
enum SparsetopicStatus sparsetopic_sparsemax(const double *x, size_t n, double *out);

/**
 * Closed-form quadratic divergence `‖μ_p − μ_q‖² + ‖σ_p − σ_q‖²` between
 * two diagonal Gaussians of dimension `d`.
 *
 * # Safety
 * The four input arrays must be readable for `d` values and `out` writable.
 */
enum SparsetopicStatus sparsetopic_rw_divergence(const double *mean_p,
                                                 const double *std_p,
                                                 const double *mean_q,
                                                 const double *std_q,
                                                 size_t d,
                                                 double *out);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `buf_len > 0`) and returns its full length in
 * bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or writable for `buf_len` bytes.
 */
size_t sparsetopic_last_error(char *buf, size_t buf_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSETOPIC_H */
