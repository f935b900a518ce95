#ifndef PFILTER_H
#define PFILTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum {
  PF_STATUS_OK = 0,
  PF_STATUS_NULL_POINTER = 1,
  PF_STATUS_INVALID_PARAMETER = 2,
  /**
   * Cuckoo or quotient filter has no room for the element.
   */
  PF_STATUS_FULL = 3,
  /**
   * Cuckoo bucket pair already holds the maximum copies of the fingerprint.
   */
  PF_STATUS_DUPLICATE_BOUND = 4,
  /**
   * Fuzzy-folded filter cannot fold any further.
   */
  PF_STATUS_CAPACITY_EXHAUSTED = 5,
  /**
   * The filter kind does not support the operation.
   */
  PF_STATUS_UNSUPPORTED = 6,
  /**
   * Serialized bytes are malformed.
   */
  PF_STATUS_DECODE = 7,
  /**
   * An internal panic was caught at the boundary.
   */
  PF_STATUS_INTERNAL = 8,
} PfStatus;

/**
 * Opaque filter handle.
 */
typedef struct PfFilter PfFilter;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Standard Bloom filter of `m` bits with `h` hash functions.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
PfStatus pf_bloom_new(uint64_t m, uint32_t h, uint64_t seed, PfFilter **out);

/**
 * Counting Bloom filter of `m` counters of `counter_width` bits (0 selects the default).
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
PfStatus pf_counting_new(uint64_t m,
                         uint32_t h,
                         uint64_t seed,
                         uint32_t counter_width,
                         PfFilter **out);

/**
 * Blocked Bloom filter of `m` bits in blocks of `block_bits` (0 selects the default).
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
PfStatus pf_blocked_new(uint64_t m, uint32_t h, uint64_t seed, uint32_t block_bits, PfFilter **out);

/**
 * Quotient filter with `2^q` slots and `r`-bit remainders.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
PfStatus pf_quotient_new(uint8_t q, uint8_t r, uint64_t seed, PfFilter **out);

/**
 * Fuzzy-folded filter with a budget of `m` bits and fold threshold in `(0, 1]`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
PfStatus pf_fuzzyfold_new(uint64_t m, uint32_t h, uint64_t seed, double threshold, PfFilter **out);

/**
 * Cuckoo filter with `2^bucket_bits` buckets of `slots_per_bucket` fingerprints.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
PfStatus pf_cuckoo_new(uint8_t bucket_bits,
                       uint8_t slots_per_bucket,
                       uint8_t fingerprint_bits,
                       uint32_t max_kicks,
                       uint64_t seed,
                       PfFilter **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `f` must be null or a handle not yet freed.
 */
void pf_filter_free(PfFilter *f);

/**
 * Kind byte of the filter: 1 bloom, 2 counting, 3 blocked, 4 quotient,
 * 5 fuzzy-folded, 6 cuckoo.
 *
 * # Safety
 * `f` must be a live handle and `out` valid for a write.
 */
PfStatus pf_kind(const PfFilter *f, uint8_t *out);

/**
 * # Safety
 * `f` must be a live handle; `data` must point to `len` readable bytes.
 */
PfStatus pf_insert(PfFilter *f, const uint8_t *data, size_t len);

/**
 * # Safety
 * `f` must be a live handle; `data` must point to `len` readable bytes;
 * `out` must be valid for a write.
 */
PfStatus pf_contains(const PfFilter *f, const uint8_t *data, size_t len, bool *out);

/**
 * Removes one copy of an element. `out` receives whether a copy was found.
 * Returns `Unsupported` for kinds without removal.
 *
 * # Safety
 * `f` must be a live handle; `data` must point to `len` readable bytes;
 * `out` must be valid for a write.
 */
PfStatus pf_remove(PfFilter *f, const uint8_t *data, size_t len, bool *out);

/**
 * Number of live elements.
 *
 * # Safety
 * `f` must be a live handle and `out` valid for a write.
 */
PfStatus pf_len(const PfFilter *f, uint64_t *out);

/**
 * Expected false positive rate in the filter's current state.
 *
 * # Safety
 * `f` must be a live handle and `out` valid for a write.
 */
PfStatus pf_expected_fpr(const PfFilter *f, double *out);

/**
 * Encodes the filter in the binary format. The buffer must be released
 * with `pf_buffer_free(*out_data, *out_len)`.
 *
 * # Safety
 * `f` must be a live handle; `out_data` and `out_len` valid for writes.
 */
PfStatus pf_serialize(const PfFilter *f, uint8_t **out_data, size_t *out_len);

/**
 * Releases a buffer from `pf_serialize`. Null is ignored.
 *
 * # Safety
 * `data` and `len` must be exactly as returned by `pf_serialize`, not yet freed.
 */
void pf_buffer_free(uint8_t *data, size_t len);

/**
 * Decodes a filter from the binary format into a new handle.
 *
 * # Safety
 * `data` must point to `len` readable bytes; `out` valid for a pointer write.
 */
PfStatus pf_deserialize(const uint8_t *data, size_t len, PfFilter **out);

/**
 * Both forms of the Bloom false positive estimate for `n` elements.
 *
 * # Safety
 * `out_exact` and `out_approximate` must be valid for writes.
 */
PfStatus pf_predicted_fpr(uint64_t m,
                          uint32_t h,
                          uint64_t n,
                          double *out_exact,
                          double *out_approximate);

/**
 * Hash count for a target false positive rate.
 *
 * # Safety
 * `out` must be valid for a write.
 */
PfStatus pf_optimal_hash_count(double target_fpr, uint32_t *out);

/**
 * Smallest bit count meeting `target_fpr` for `n` elements.
 *
 * # Safety
 * `out` must be valid for a write.
 */
PfStatus pf_required_bits(uint64_t n, double target_fpr, uint64_t *out);

/**
 * Static, NUL-terminated description of a `PfStatus` value. Unknown
 * codes get a generic message.
 */
const char *pf_status_message(uint32_t status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PFILTER_H */
