#ifndef PF_FORGE_H
#define PF_FORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PfMode {
  PF_MODE_CERTIFIED = 0,
  PF_MODE_WINDOWED = 1,
} PfMode;

typedef enum PfStatus {
  /**
   * Success; for checks, the sequence passed.
   */
  PF_OK = 0,
  /**
   * A check failed; the verdict carries a witness.
   */
  PF_FAIL = 1,
  /**
   * A required pointer was null.
   */
  PF_ERR_NULL = 2,
  /**
   * An input string was not valid UTF-8.
   */
  PF_ERR_UTF8 = 3,
  /**
   * The library rejected the input; see the last error.
   */
  PF_ERR_INVALID = 4,
  /**
   * A panic was caught at the boundary.
   */
  PF_ERR_PANIC = 5,
} PfStatus;

/**
 * Opaque coefficient sequence.
 */
typedef struct PfSeq PfSeq;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses `{"coeffs": ["p/q", ...]}` into a new handle.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be writable.
 */
enum PfStatus pf_seq_from_json(const char *json, struct PfSeq **out);

/**
 * Coefficients of `1/(1-z)^power` up to index `window`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PfStatus pf_seq_inv_pow(size_t power, size_t window, struct PfSeq **out);

/**
 * Coefficients of `sum_k z^{k!}` up to index `window`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PfStatus pf_seq_lacunary(size_t window, struct PfSeq **out);

/**
 * Number of stored coefficients, or 0 for a null handle.
 *
 * # Safety
 * `seq` must be null or a live handle.
 */
size_t pf_seq_len(const struct PfSeq *seq);

/**
 * Coefficient `k` as `"p/q"`.
 *
 * # Safety
 * `seq` must be a live handle; `out` must be writable.
 */
enum PfStatus pf_seq_coeff(const struct PfSeq *seq, size_t k, char **out);

/**
 * # Safety
 * `seq` must be a live handle; `out` must be writable.
 */
enum PfStatus pf_seq_to_json(const struct PfSeq *seq, char **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `seq` must be null or a handle not yet freed.
 */
void pf_seq_free(struct PfSeq *seq);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void pf_string_free(char *s);

/**
 * Contiguous-minor check; writes the verdict JSON. Returns `PF_OK` on a
 * strict pass and `PF_FAIL` with a witness otherwise.
 *
 * # Safety
 * `seq` must be a live handle; `verdict` must be writable.
 */
enum PfStatus pf_check_contiguous(const struct PfSeq *seq, size_t r, size_t window, char **verdict);

/**
 * Every minor of order `<= r` on `0..=window`, refusing scans above `budget`
 * evaluations (0 selects the default).
 *
 * # Safety
 * `seq` must be a live handle; `verdict` must be writable.
 */
enum PfStatus pf_check_all_minors(const struct PfSeq *seq,
                                  size_t r,
                                  size_t window,
                                  uint64_t budget,
                                  char **verdict);

/**
 * Perturbation plan for `1/(1-z)^{r^2} + eps g` with `|g^{(p)}|` bounded
 * through `c_bound` (`"p/q"`); writes the plan JSON.
 *
 * # Safety
 * `c_bound` must be a valid string; `plan` must be writable.
 */
enum PfStatus pf_epsilon_bound(size_t r,
                               size_t alpha,
                               const char *c_bound,
                               enum PfMode mode,
                               size_t k,
                               char **plan);

/**
 * Coefficients of `1/(1-z)^{r^2} + eps g` up to `window`.
 *
 * # Safety
 * `g` must be a live handle, `eps` a valid string, `out` writable.
 */
enum PfStatus pf_build_perturbed(const struct PfSeq *g,
                                 size_t r,
                                 const char *eps,
                                 size_t window,
                                 struct PfSeq **out);

/**
 * `c_k - c_{k-1}/T`, `steps` times, on a strictly positive sequence.
 *
 * # Safety
 * `seq` must be a live handle, `t` a valid string, `out` writable.
 */
enum PfStatus pf_deflate(const struct PfSeq *seq, const char *t, size_t steps, struct PfSeq **out);

/**
 * Validates a domain and composes a PF_r generating function for it;
 * writes the composition JSON.
 *
 * # Safety
 * `domain_json` must be a valid string; `out` must be writable.
 */
enum PfStatus pf_compose_domain(const char *domain_json,
                                size_t r,
                                size_t window,
                                size_t terms,
                                char **out);

/**
 * Code of the last error on this thread (`"E_..."`), or null. Valid until
 * the next call into this library on the same thread.
 */
const char *pf_last_error_code(void);

/**
 * Message of the last error on this thread, or null. Same lifetime as
 * [`pf_last_error_code`].
 */
const char *pf_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PF_FORGE_H */
