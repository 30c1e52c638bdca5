#ifndef ALTPROJ_H
#define ALTPROJ_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AltprojStatus {
  ALTPROJ_STATUS_OK = 0,
  ALTPROJ_STATUS_NULL_POINTER = 1,
  ALTPROJ_STATUS_INVALID_ARGUMENT = 2,
  ALTPROJ_STATUS_DIMENSION_MISMATCH = 3,
  ALTPROJ_STATUS_NOT_CONVERGED = 4,
  ALTPROJ_STATUS_PANIC = 5,
} AltprojStatus;

/**
 * Opaque subspace handle.
 */
typedef struct AltprojSubspace AltprojSubspace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *altproj_last_error(void);

/**
 * Span of `count` vectors of length `n`, stored row after row in `data`.
 *
 * # Safety
 * `data` must hold `count * n` doubles and `out` must be writable.
 */
enum AltprojStatus altproj_subspace_from_vectors(const double *data,
                                                 size_t count,
                                                 size_t n,
                                                 struct AltprojSubspace **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void altproj_subspace_free(struct AltprojSubspace *s);

/**
 * # Safety
 * `s` must be a live handle and `dim`, `ambient_dim` writable or null.
 */
enum AltprojStatus altproj_subspace_dims(const struct AltprojSubspace *s,
                                         size_t *dim,
                                         size_t *ambient_dim);

/**
 * Writes the projection of `x` (length `n`) into `out` (length `n`).
 *
 * # Safety
 * `s` must be a live handle; `x` and `out` must hold `n` doubles.
 */
enum AltprojStatus altproj_subspace_project(const struct AltprojSubspace *s,
                                            const double *x,
                                            size_t n,
                                            double *out);

/**
 * # Safety
 * `spaces` must hold `count` live handles and `out` must be writable.
 */
enum AltprojStatus altproj_intersect(const struct AltprojSubspace *const *spaces,
                                     size_t count,
                                     struct AltprojSubspace **out);

/**
 * # Safety
 * `a`, `b` must be live handles and `out` writable.
 */
enum AltprojStatus altproj_friedrichs_cosine(const struct AltprojSubspace *a,
                                             const struct AltprojSubspace *b,
                                             double *out);

/**
 * Iterates the periodic schedule `pattern` (1-based indices into `spaces`)
 * from `x0` until `tol` or `max_steps`. The last iterate goes to `x_out`.
 * Returns `NotConverged` when the step limit is hit; `x_out` is still set.
 *
 * # Safety
 * Pointers must be valid for the given lengths; `x0` and `x_out` hold `n`.
 */
enum AltprojStatus altproj_run_periodic(const struct AltprojSubspace *const *spaces,
                                        size_t count,
                                        const size_t *pattern,
                                        size_t pattern_len,
                                        const double *x0,
                                        size_t n,
                                        size_t max_steps,
                                        double tol,
                                        double *x_out,
                                        size_t *steps_out);

/**
 * Cyclic projections onto the rows of `A x = c` (`A` is `m x n`, row-major).
 * A null `x0` starts from zero, which gives the minimal-norm solution.
 * Returns `NotConverged` when `tol` is not reached; `x_out` is still set.
 *
 * # Safety
 * `a` holds `m * n`, `c` holds `m`, `x0` (if not null) and `x_out` hold `n`.
 */
enum AltprojStatus altproj_kaczmarz_dense(const double *a,
                                          size_t m,
                                          size_t n,
                                          const double *c,
                                          const double *x0,
                                          size_t max_sweeps,
                                          double tol,
                                          double *x_out,
                                          size_t *sweeps_out);

/**
 * Clip positions after `n_iters` steps of the string-thirds walk, plus
 * whether the geometric deviation bound held at every step.
 *
 * # Safety
 * `left`, `right` and `bound_ok` must be writable or null.
 */
enum AltprojStatus altproj_thirds(double x,
                                  double y,
                                  double z,
                                  size_t n_iters,
                                  double *left,
                                  double *right,
                                  int *bound_ok);

/**
 * Number of quarter-circle steps needed for tolerance `eps`.
 *
 * # Safety
 * `out` must be writable.
 */
enum AltprojStatus altproj_k_of_eps(double eps, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALTPROJ_H */
