#ifndef BVS_H
#define BVS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BvsMethod {
  BVS_METHOD_GN = 0,
  BVS_METHOD_MIX = 1,
  BVS_METHOD_IP = 2,
  BVS_METHOD_SCHWARZ = 3,
} BvsMethod;

typedef enum BvsPriorKind {
  /**
   * Independent inclusion with probability `theta`.
   */
  BVS_PRIOR_KIND_BERNOULLI = 0,
  BVS_PRIOR_KIND_HIERARCHICAL_UNIFORM = 1,
  BVS_PRIOR_KIND_UNIFORM = 2,
} BvsPriorKind;

/**
 * Result of every call.
 */
typedef enum BvsStatus {
  BVS_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  BVS_STATUS_NULL_POINTER = 1,
  /**
   * Argument outside the domain of the operation.
   */
  BVS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Malformed input data, rank deficiency, too few observations.
   */
  BVS_STATUS_DATA_ERROR = 3,
  /**
   * Quadrature or series failed to converge, or no threshold exists.
   */
  BVS_STATUS_NUMERICAL_ERROR = 4,
  /**
   * Model space larger than the enumeration cap.
   */
  BVS_STATUS_CAPACITY_EXCEEDED = 5,
  /**
   * A string argument was not valid UTF-8.
   */
  BVS_STATUS_INVALID_UTF8 = 6,
  /**
   * An internal panic was caught at the boundary.
   */
  BVS_STATUS_PANIC = 7,
} BvsStatus;

/**
 * Opaque dataset handle.
 */
typedef struct BvsDataset BvsDataset;

/**
 * Opaque posterior table handle.
 */
typedef struct BvsPosterior BvsPosterior;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the message of the last failed call on this thread into `buf`
 * (NUL-terminated, truncated to `len` bytes) and returns the full message
 * length excluding the terminator. Passing `buf = NULL` only queries the length.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable bytes.
 */
size_t bvs_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bvs_version(void);

/**
 * Loads a CSV file with a `y` column.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum BvsStatus bvs_dataset_load_csv(const char *path, struct BvsDataset **out);

/**
 * Builds a dataset from `n` responses and an `n x k` column-major regressor
 * matrix. Columns are named `x1 .. xk`.
 *
 * # Safety
 * `y` must hold `n` values, `x` must hold `n * k` values, `out` must be writable.
 */
enum BvsStatus bvs_dataset_from_arrays(size_t n,
                                       size_t k,
                                       const double *y,
                                       const double *x,
                                       struct BvsDataset **out);

/**
 * Releases a dataset; NULL is ignored.
 *
 * # Safety
 * `data` must be NULL or a handle from this library that was not freed yet.
 */
void bvs_dataset_free(struct BvsDataset *data);

/**
 * Number of observations and candidate regressors.
 *
 * # Safety
 * `data` must be a live handle; `n` and `k` must be writable.
 */
enum BvsStatus bvs_dataset_shape(const struct BvsDataset *data, size_t *n, size_t *k);

/**
 * Residual-sum-of-squares ratio of the subset (1-based indices, any order)
 * to the intercept-only model.
 *
 * # Safety
 * `data` must be a live handle; `indices` must hold `len` values; `out` must be writable.
 */
enum BvsStatus bvs_bj0(const struct BvsDataset *data,
                       const size_t *indices,
                       size_t len,
                       double *out);

/**
 * `ln B_j0` with the default quadrature settings.
 *
 * # Safety
 * `out` must be writable.
 */
enum BvsStatus bvs_log_bayes_factor(enum BvsMethod method,
                                    size_t n,
                                    size_t j,
                                    double b_j0,
                                    double *out);

/**
 * Critical value `b*`: the rule accepts `M_j` over `M_0` iff `b_j0 <= b*`.
 *
 * # Safety
 * `out` must be writable.
 */
enum BvsStatus bvs_critical_threshold(enum BvsMethod method, size_t n, size_t j, double *out);

/**
 * Threshold, Type I error and power at pseudo-distance `delta`.
 *
 * # Safety
 * The three output pointers must be writable.
 */
enum BvsStatus bvs_error_point(enum BvsMethod method,
                               size_t n,
                               size_t j,
                               double delta,
                               double *b_star,
                               double *type1,
                               double *power);

/**
 * Posterior over all `2^k` subsets. `theta` is read only for the Bernoulli
 * prior; `cap` bounds `k`.
 *
 * # Safety
 * `data` must be a live handle; `out` must be writable.
 */
enum BvsStatus bvs_posterior_enumerate(const struct BvsDataset *data,
                                       enum BvsMethod method,
                                       enum BvsPriorKind prior,
                                       double theta,
                                       size_t cap,
                                       struct BvsPosterior **out);

/**
 * Releases a posterior table; NULL is ignored.
 *
 * # Safety
 * `post` must be NULL or a handle from this library that was not freed yet.
 */
void bvs_posterior_free(struct BvsPosterior *post);

/**
 * Number of models in the table (`2^k`).
 *
 * # Safety
 * `post` must be a live handle; `out` must be writable.
 */
enum BvsStatus bvs_posterior_len(const struct BvsPosterior *post, size_t *out);

/**
 * Posterior probability of the model whose bit `i` selects regressor `i + 1`.
 *
 * # Safety
 * `post` must be a live handle; `out` must be writable.
 */
enum BvsStatus bvs_posterior_probability(const struct BvsPosterior *post,
                                         uint64_t mask,
                                         double *out);

/**
 * The highest-posterior model as a bit mask, with its probability.
 *
 * # Safety
 * `post` must be a live handle; both outputs must be writable.
 */
enum BvsStatus bvs_posterior_modal(const struct BvsPosterior *post, uint64_t *mask, double *prob);

/**
 * Marginal inclusion probabilities of regressors `1 .. k` into `out[0 .. k]`.
 *
 * # Safety
 * `post` must be a live handle; `out` must hold `len` writable values.
 */
enum BvsStatus bvs_posterior_inclusion(const struct BvsPosterior *post, double *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BVS_H */
