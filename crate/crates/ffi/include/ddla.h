#ifndef DDLA_H
#define DDLA_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call. Zero is success.
 */
typedef enum DdlaStatus {
  DDLA_STATUS_OK = 0,
  DDLA_STATUS_NULL_POINTER = 1,
  DDLA_STATUS_INVALID_PARAMETER = 2,
  DDLA_STATUS_EMPTY_CLUSTER = 3,
  DDLA_STATUS_FROZEN_CLUSTER = 4,
  DDLA_STATUS_REJECTION_OVERFLOW = 5,
  DDLA_STATUS_WINDOW_BREACH = 6,
  DDLA_STATUS_PARSE = 7,
  DDLA_STATUS_IO = 8,
  DDLA_STATUS_BUFFER_TOO_SMALL = 9,
  DDLA_STATUS_PANIC = 10,
} DdlaStatus;

typedef enum DdlaSampler {
  DDLA_SAMPLER_LINE = 0,
  DDLA_SAMPLER_EDGE = 1,
  DDLA_SAMPLER_EXACT = 2,
} DdlaSampler;

typedef enum DdlaContinuousMode {
  /**
   * Event-driven, walk acceptance.
   */
  DDLA_CONTINUOUS_MODE_GILLESPIE = 0,
  /**
   * Event-driven, exact escape-probability acceptance.
   */
  DDLA_CONTINUOUS_MODE_GILLESPIE_EXACT = 1,
  /**
   * Replay of the Harris system keyed by the seed.
   */
  DDLA_CONTINUOUS_MODE_HARRIS = 2,
} DdlaContinuousMode;

/**
 * Opaque cluster handle.
 */
typedef struct DdlaCluster DdlaCluster;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ddla_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *ddla_last_error(void);

/**
 * The one-site cluster at the origin.
 */
struct DdlaCluster *ddla_cluster_new_origin(void);

/**
 * A cluster from `n` interleaved `a, b` pairs. Duplicates are merged.
 *
 * # Safety
 * `pairs` must point to `2 * n` readable values; `out` must be writable.
 */
enum DdlaStatus ddla_cluster_from_sites(const int64_t *pairs, size_t n, struct DdlaCluster **out);

/**
 * Releases a cluster. NULL is ignored.
 *
 * # Safety
 * `c` must come from this library and not be used afterwards.
 */
void ddla_cluster_free(struct DdlaCluster *c);

/**
 * Number of sites; 0 for NULL.
 *
 * # Safety
 * `c` must be NULL or a live handle.
 */
size_t ddla_cluster_len(const struct DdlaCluster *c);

/**
 * Largest `a + b` over the cluster.
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum DdlaStatus ddla_cluster_height(const struct DdlaCluster *c, int64_t *out);

/**
 * 1 if the site is in the cluster, 0 otherwise (and for NULL).
 *
 * # Safety
 * `c` must be NULL or a live handle.
 */
int32_t ddla_cluster_contains(const struct DdlaCluster *c, int64_t a, int64_t b);

/**
 * Writes the sites in lexicographic order as `a, b` pairs. `*written` is
 * always set to the number of sites; if `capacity` (in pairs) is smaller,
 * nothing is copied and `BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `out` must have room for `2 * capacity` values; `written` must be writable.
 */
enum DdlaStatus ddla_cluster_sites(const struct DdlaCluster *c,
                                   int64_t *out,
                                   size_t capacity,
                                   size_t *written);

/**
 * Adds `n` sites by the discrete dynamics, seeded by `seed`.
 *
 * # Safety
 * `c` must be a live handle.
 */
enum DdlaStatus ddla_grow(struct DdlaCluster *c,
                          uint64_t n,
                          enum DdlaSampler sampler,
                          uint64_t seed);

/**
 * Runs the continuous-time dynamics to `horizon` in place. `additions`, if
 * not NULL, receives the number of sites added.
 *
 * # Safety
 * `c` must be a live handle; `additions` must be NULL or writable.
 */
enum DdlaStatus ddla_grow_continuous(struct DdlaCluster *c,
                                     double horizon,
                                     enum DdlaContinuousMode mode,
                                     uint64_t seed,
                                     uint64_t *additions);

/**
 * First-passage growth from `start` to `horizon` under the Harris system
 * keyed by `seed`; the result is a new handle.
 *
 * # Safety
 * `start` must be a live handle; `out` must be writable.
 */
enum DdlaStatus ddla_dfpp(const struct DdlaCluster *start,
                          double horizon,
                          uint64_t seed,
                          struct DdlaCluster **out);

/**
 * Total activity (sum over growth edges of the escape probability of the
 * upper end) in floating point.
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum DdlaStatus ddla_activity_total(const struct DdlaCluster *c, double *out);

/**
 * Next-site law: growth sites as `a, b` pairs in `sites` and their
 * probabilities in `probs`, sorted by site. Sizing follows
 * `ddla_cluster_sites`.
 *
 * # Safety
 * `sites` must have room for `2 * capacity` values and `probs` for
 * `capacity`; `written` must be writable.
 */
enum DdlaStatus ddla_next_site_law(const struct DdlaCluster *c,
                                   int64_t *sites,
                                   double *probs,
                                   size_t capacity,
                                   size_t *written);

/**
 * Writes the cluster as a snapshot file.
 *
 * # Safety
 * `c` must be a live handle; `path` a NUL-terminated UTF-8 string.
 */
enum DdlaStatus ddla_snapshot_save(const struct DdlaCluster *c, const char *path);

/**
 * Reads a snapshot file into a new handle.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
 */
enum DdlaStatus ddla_snapshot_load(const char *path, struct DdlaCluster **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DDLA_H */
