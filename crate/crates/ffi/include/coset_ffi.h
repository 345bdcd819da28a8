#ifndef COSET_FFI_H
#define COSET_FFI_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum CosetStatus {
  COSET_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  COSET_STATUS_NULL_POINTER = 1,
  /**
   * Out-of-range or inconsistent parameters.
   */
  COSET_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Malformed JSON or an invalid strategy.
   */
  COSET_STATUS_FORMAT = 3,
  /**
   * The Grassmannian is larger than the cap.
   */
  COSET_STATUS_CAP_EXCEEDED = 4,
  /**
   * Internal invariant or eigensolver failure.
   */
  COSET_STATUS_INTERNAL = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  COSET_STATUS_PANIC = 6,
} CosetStatus;

/**
 * Family of mutually orthogonal permutations.
 */
typedef struct CosetFamily CosetFamily;

/**
 * `Gr_2(n, k)` in canonical order.
 */
typedef struct CosetGrassmannian CosetGrassmannian;

/**
 * Validated game strategy.
 */
typedef struct CosetStrategy CosetStrategy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *coset_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void coset_string_free(char *s);

/**
 * `binom(n, k)_2` as a decimal string.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CosetStatus coset_gaussian_binomial(size_t n, size_t k, char **out);

/**
 * Number of `k`-subspaces meeting a fixed one in dimension `m`, as a
 * decimal string.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CosetStatus coset_intersection_count(size_t n, size_t k, size_t m, char **out);

/**
 * Upper bound on the entangled winning probability of the `(n, k)` game.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CosetStatus coset_entangled_bound(size_t n, size_t k, double *out);

/**
 * Optimal winning probability over unentangled strategies.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CosetStatus coset_unentangled_value(size_t n, size_t k, double *out);

/**
 * `2^(-min(R, 1-R)/2)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CosetStatus coset_rate_envelope(double rate, double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum CosetStatus coset_grassmannian_new(size_t n,
                                        size_t k,
                                        uint64_t cap,
                                        struct CosetGrassmannian **out);

/**
 * # Safety
 * `g` must be a live handle; `out` must be valid for writes.
 */
enum CosetStatus coset_grassmannian_len(const struct CosetGrassmannian *g, size_t *out);

/**
 * Basis of subspace `index` as comma-separated bit strings.
 *
 * # Safety
 * `g` must be a live handle; `out` must be valid for writes.
 */
enum CosetStatus coset_grassmannian_subspace(const struct CosetGrassmannian *g,
                                             size_t index,
                                             char **out);

/**
 * # Safety
 * `g` must be null or a handle from [`coset_grassmannian_new`] not yet freed.
 */
void coset_grassmannian_free(struct CosetGrassmannian *g);

/**
 * Full family of `binom(n, k)_2` permutations, or the `m`-intersection
 * family when `m >= 0`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CosetStatus coset_family_new(size_t n,
                                  size_t k,
                                  int64_t m,
                                  uint64_t cap,
                                  struct CosetFamily **out);

/**
 * # Safety
 * `f` must be a live handle; `out` must be valid for writes.
 */
enum CosetStatus coset_family_len(const struct CosetFamily *f, size_t *out);

/**
 * Copies member `index` into `perm` (which must hold `perm_len` entries,
 * at least the Grassmannian size) and its intersection dimension into `m`.
 *
 * # Safety
 * `f` must be a live handle, `m` valid for writes and `perm` valid for
 * `perm_len` writes.
 */
enum CosetStatus coset_family_entry(const struct CosetFamily *f,
                                    size_t index,
                                    size_t *m,
                                    size_t *perm,
                                    size_t perm_len);

/**
 * Checks bijectivity, the intersection property and orthogonality.
 *
 * # Safety
 * `f` must be a live handle; `passed` must be valid for writes.
 */
enum CosetStatus coset_family_verify(const struct CosetFamily *f, uint64_t cap, bool *passed);

/**
 * Serialized family, `{n, k, entries: [{m, perm}]}`.
 *
 * # Safety
 * `f` must be a live handle; `out` must be valid for writes.
 */
enum CosetStatus coset_family_to_json(const struct CosetFamily *f, char **out);

/**
 * # Safety
 * `f` must be null or a handle from [`coset_family_new`] not yet freed.
 */
void coset_family_free(struct CosetFamily *f);

/**
 * Parses and validates a strategy file with default tolerances.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum CosetStatus coset_strategy_from_json(const char *json, struct CosetStrategy **out);

/**
 * Winning probability by direct evaluation of the channel.
 *
 * # Safety
 * `s` must be a live handle; `out` must be valid for writes.
 */
enum CosetStatus coset_strategy_p_win(const struct CosetStrategy *s, double *out);

/**
 * Winning probability evaluated against the Choi state.
 *
 * # Safety
 * `s` must be a live handle; `out` must be valid for writes.
 */
enum CosetStatus coset_strategy_p_win_extended(const struct CosetStrategy *s, double *out);

/**
 * # Safety
 * `s` must be null or a handle from [`coset_strategy_from_json`] not yet
 * freed.
 */
void coset_strategy_free(struct CosetStrategy *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COSET_FFI_H */
