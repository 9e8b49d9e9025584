#ifndef DUBROVIN_H
#define DUBROVIN_H

#include <stddef.h>
#include <stdint.h>

/**
 * Result codes.
 */
typedef enum DubrovinStatus {
  DUBROVIN_STATUS_OK = 0,
  DUBROVIN_STATUS_NULL_POINTER = 1,
  DUBROVIN_STATUS_INVALID_INPUT = 2,
  DUBROVIN_STATUS_DIVERGENT = 3,
  DUBROVIN_STATUS_NUMERICAL_FAILURE = 4,
  DUBROVIN_STATUS_PANIC = 5,
} DubrovinStatus;

/**
 * Opaque gap set.
 */
typedef struct DubrovinGapSet DubrovinGapSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message (NUL-terminated) into `buf`.
 * Returns the buffer size needed including the terminator; nothing is written
 * when `len` is smaller than that.
 *
 * # Safety
 * `buf` must be null or valid for `len` writes.
 */
size_t dubrovin_last_error(char *buf, size_t len);

/**
 * Builds a gap set from spectrum JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for one write.
 */
enum DubrovinStatus dubrovin_gapset_from_json(const char *json, struct DubrovinGapSet **out);

/**
 * Builds a finite gap set from `count` pairs `edges[2j], edges[2j+1]`.
 *
 * # Safety
 * `edges` must be valid for `2·count` reads; `out` must be valid for one write.
 */
enum DubrovinStatus dubrovin_gapset_new(double e_low,
                                        const double *edges,
                                        size_t count,
                                        struct DubrovinGapSet **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `set` must be null or a handle not yet freed.
 */
void dubrovin_gapset_free(struct DubrovinGapSet *set);

/**
 * Number of explicit gaps (the length of a Dirichlet angle vector).
 *
 * # Safety
 * `set` must be a live handle; `out` valid for one write.
 */
enum DubrovinStatus dubrovin_gapset_len(const struct DubrovinGapSet *set, size_t *out);

/**
 * Potential `q` from Dirichlet angles; `tail_bound` may be null.
 *
 * # Safety
 * `phi` valid for `count` reads; `q` valid for one write; `tail_bound` null or valid.
 */
enum DubrovinStatus dubrovin_trace_q(const struct DubrovinGapSet *set,
                                     const double *phi,
                                     size_t count,
                                     double *q,
                                     double *tail_bound);

/**
 * Advances angles along the translation flow (`direction` 0) or the n-th
 * hierarchy flow (`direction` 1) by `span`.
 *
 * # Safety
 * `phi_in` and `phi_out` valid for `count` elements (they may alias).
 */
enum DubrovinStatus dubrovin_flow(const struct DubrovinGapSet *set,
                                  uint32_t n,
                                  int direction,
                                  double span,
                                  double rtol,
                                  double atol,
                                  const double *phi_in,
                                  double *phi_out,
                                  size_t count);

/**
 * Diagonal Green's function `G(z)` at the given angles.
 *
 * # Safety
 * `phi` valid for `count` reads; `re` and `im` valid for one write each.
 */
enum DubrovinStatus dubrovin_green(const struct DubrovinGapSet *set,
                                   const double *phi,
                                   size_t count,
                                   double z_re,
                                   double z_im,
                                   double *re,
                                   double *im);

/**
 * Writes 1 to `pass` when the moment and Craig-type conditions hold at `n`, else 0.
 *
 * # Safety
 * `pass` valid for one write.
 */
enum DubrovinStatus dubrovin_check_craig(const struct DubrovinGapSet *set, uint32_t n, int *pass);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dubrovin_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DUBROVIN_H */
