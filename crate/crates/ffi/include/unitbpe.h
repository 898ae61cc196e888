#ifndef UNITBPE_H
#define UNITBPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Corpus file layout.
 */
typedef enum UnitbpeFormat {
  /**
   * Whitespace-separated integer cluster ids.
   */
  UNITBPE_FORMAT_DAU_INT = 0,
  /**
   * Whitespace-separated labels; `_` is the word boundary.
   */
  UNITBPE_FORMAT_SYMBOLIC = 1,
} UnitbpeFormat;

/**
 * Result code of every fallible call.
 */
typedef enum UnitbpeStatus {
  UNITBPE_STATUS_OK = 0,
  UNITBPE_STATUS_NULL_POINTER = 1,
  UNITBPE_STATUS_INVALID_ARGUMENT = 2,
  UNITBPE_STATUS_PARSE = 3,
  UNITBPE_STATUS_VALIDATION = 4,
  UNITBPE_STATUS_IO = 5,
  UNITBPE_STATUS_BUFFER_TOO_SMALL = 6,
  UNITBPE_STATUS_PANIC = 7,
} UnitbpeStatus;

/**
 * Opaque corpus handle.
 */
typedef struct UnitbpeCorpus UnitbpeCorpus;

/**
 * Opaque merge-table handle.
 */
typedef struct UnitbpeMergeTable UnitbpeMergeTable;

/**
 * Figures produced by [`unitbpe_analyze`].
 */
typedef struct UnitbpeReport {
  double n_hat;
  double k_hat;
  double reduction;
  double bit_increase;
  double compression;
  double balance_before;
  double balance_after;
  double run_length_mean;
  size_t base_vocab;
  size_t token_vocab;
} UnitbpeReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if it succeeded.
 * The pointer stays valid until the next call into the library on this thread.
 */
const char *unitbpe_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *unitbpe_version(void);

/**
 * Loads a corpus file. `clusters` sets the DAU inventory size for `DauInt`
 * files (0 means 1000); symbolic files infer their vocabulary.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum UnitbpeStatus unitbpe_corpus_load(const char *path,
                                       enum UnitbpeFormat format,
                                       size_t clusters,
                                       struct UnitbpeCorpus **out);

/**
 * Builds a DAU corpus from memory. `units` holds all sequences back to back;
 * `lengths[i]` is the length of sequence `i`.
 *
 * # Safety
 * `units` must point to `sum(lengths)` ids and `lengths` to `num_sequences` values.
 */
enum UnitbpeStatus unitbpe_corpus_from_units(const uint32_t *units,
                                             const size_t *lengths,
                                             size_t num_sequences,
                                             size_t clusters,
                                             struct UnitbpeCorpus **out);

/**
 * # Safety
 * `corpus` must be a live handle or null.
 */
size_t unitbpe_corpus_num_sequences(const struct UnitbpeCorpus *corpus);

/**
 * # Safety
 * `corpus` must be a live handle or null.
 */
size_t unitbpe_corpus_total_units(const struct UnitbpeCorpus *corpus);

/**
 * Size of the corpus's base vocabulary, specials included.
 *
 * # Safety
 * `corpus` must be a live handle or null.
 */
size_t unitbpe_corpus_vocab_size(const struct UnitbpeCorpus *corpus);

/**
 * Writes the corpus vocabulary as a sidecar file (one label per line).
 *
 * # Safety
 * `corpus` must be a live handle and `path` a NUL-terminated string.
 */
enum UnitbpeStatus unitbpe_corpus_write_vocabulary(const struct UnitbpeCorpus *corpus,
                                                   const char *path);

/**
 * # Safety
 * `corpus` must come from this library and not be used afterwards. Null is ignored.
 */
void unitbpe_corpus_free(struct UnitbpeCorpus *corpus);

/**
 * Trains a merge table of `target_size` tokens on `corpus`.
 *
 * # Safety
 * `corpus` must be a live handle and `out` a valid pointer.
 */
enum UnitbpeStatus unitbpe_train(const struct UnitbpeCorpus *corpus,
                                 size_t target_size,
                                 bool respect_boundaries,
                                 uint64_t min_pair_count,
                                 size_t threads,
                                 struct UnitbpeMergeTable **out);

/**
 * Loads a merge table. `vocab_path` names a sidecar vocabulary and may be
 * null for DAU tables; `boundary` is the sidecar's boundary label or null.
 *
 * # Safety
 * String arguments must be NUL-terminated or null where allowed; `out` must be valid.
 */
enum UnitbpeStatus unitbpe_merge_table_load(const char *path,
                                            const char *vocab_path,
                                            const char *boundary,
                                            struct UnitbpeMergeTable **out);

/**
 * # Safety
 * `table` must be a live handle and `path` a NUL-terminated string.
 */
enum UnitbpeStatus unitbpe_merge_table_save(const struct UnitbpeMergeTable *table,
                                            const char *path);

/**
 * Token inventory size |Z| (base units plus merges).
 *
 * # Safety
 * `table` must be a live handle or null.
 */
size_t unitbpe_merge_table_vocab_size(const struct UnitbpeMergeTable *table);

/**
 * # Safety
 * `table` must be a live handle or null.
 */
size_t unitbpe_merge_table_num_merges(const struct UnitbpeMergeTable *table);

/**
 * # Safety
 * `table` must come from this library and not be used afterwards. Null is ignored.
 */
void unitbpe_merge_table_free(struct UnitbpeMergeTable *table);

/**
 * Encodes one unit sequence. At most `len` tokens are produced, so a buffer
 * of `len` ids is always large enough.
 *
 * # Safety
 * `units` must hold `len` ids and `out_tokens` room for `capacity` ids.
 */
enum UnitbpeStatus unitbpe_encode(const struct UnitbpeMergeTable *table,
                                  const uint32_t *units,
                                  size_t len,
                                  uint32_t *out_tokens,
                                  size_t capacity,
                                  size_t *out_len);

/**
 * Expands tokens back into units.
 *
 * # Safety
 * `tokens` must hold `len` ids and `out_units` room for `capacity` ids.
 */
enum UnitbpeStatus unitbpe_decode(const struct UnitbpeMergeTable *table,
                                  const uint32_t *tokens,
                                  size_t len,
                                  uint32_t *out_units,
                                  size_t capacity,
                                  size_t *out_len);

/**
 * Normalized entropy of a count histogram whose length is the vocabulary size.
 *
 * # Safety
 * `counts` must hold `len` values; `out` must be valid.
 */
enum UnitbpeStatus unitbpe_normalized_entropy(const uint64_t *counts, size_t len, double *out);

/**
 * Probability `(1 - eps)^n` that `n` tokens are all emitted correctly.
 *
 * # Safety
 * `out` must be valid.
 */
enum UnitbpeStatus unitbpe_edge_case_probability(double eps, uint64_t n, double *out);

/**
 * Compression for a length reduction between inventories of the given sizes.
 *
 * # Safety
 * `out` must be valid.
 */
enum UnitbpeStatus unitbpe_compression(double reduction,
                                       size_t base_size,
                                       size_t token_size,
                                       double *out);

/**
 * Encodes `corpus` with `table` and reports compression and balance.
 *
 * # Safety
 * Handles must be live; `out` must be valid.
 */
enum UnitbpeStatus unitbpe_analyze(const struct UnitbpeCorpus *corpus,
                                   const struct UnitbpeMergeTable *table,
                                   size_t threads,
                                   struct UnitbpeReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNITBPE_H */
