#ifndef GUIDEBENCH_H
#define GUIDEBENCH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GbStatus {
  GB_STATUS_OK = 0,
  GB_STATUS_NULL_ARGUMENT = 1,
  GB_STATUS_INVALID_UTF8 = 2,
  GB_STATUS_EMPTY_INPUT = 3,
  GB_STATUS_STRUCTURE = 4,
  GB_STATUS_VALIDATION = 5,
  GB_STATUS_PRECONDITION = 6,
  GB_STATUS_NOT_FOUND = 7,
  GB_STATUS_CONFIG = 8,
  GB_STATUS_PARSE = 9,
  GB_STATUS_DATA_GAP = 10,
  GB_STATUS_BACKEND = 11,
  GB_STATUS_IO = 12,
  GB_STATUS_OTHER = 13,
  GB_STATUS_PANIC = 14,
} GbStatus;

/*
 Opaque chunk store.
 */
typedef struct GbCorpus GbCorpus;

/*
 Opaque hybrid retrieval index built with the hash embedder.
 */
typedef struct GbIndex GbIndex;

/*
 Bootstrap summary of a sample mean.
 */
typedef struct GbInterval {
  double mean;
  double ci_low;
  double ci_high;
} GbInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. Valid until
 the next call into this library on the same thread.
 */
const char *gb_last_error_message(void);

/*
 Library version as a static string.
 */
const char *gb_version(void);

/*
 # Safety
 `s` must be null or a string returned by this library, freed once.
 */
void gb_string_free(char *s);

/*
 Parse guideline marker text and chunk it. Zero word limits select the
 defaults.

 # Safety
 `text` must be a NUL-terminated string; `out` must be writable.
 */
enum GbStatus gb_corpus_parse(const char *text,
                              size_t min_words,
                              size_t max_words,
                              struct GbCorpus **out);

/*
 Load a JSONL chunk store written by `guidebench ingest`.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum GbStatus gb_corpus_load(const char *path, struct GbCorpus **out);

/*
 Number of chunks, or 0 for a null handle.

 # Safety
 `corpus` must be null or a live handle.
 */
size_t gb_corpus_len(const struct GbCorpus *corpus);

/*
 # Safety
 `corpus` must be a live handle; `out` must be writable.
 */
enum GbStatus gb_corpus_chunks_json(const struct GbCorpus *corpus, char **out);

/*
 Word share per top-level part as a JSON object.

 # Safety
 `corpus` must be a live handle; `out` must be writable.
 */
enum GbStatus gb_corpus_part_distribution_json(const struct GbCorpus *corpus, char **out);

/*
 Added, removed and modified chunks between two versions.

 # Safety
 Both handles must be live; `out` must be writable.
 */
enum GbStatus gb_corpus_diff_json(const struct GbCorpus *old,
                                  const struct GbCorpus *new_,
                                  char **out);

/*
 # Safety
 `corpus` must be null or a handle from this library, freed once.
 */
void gb_corpus_free(struct GbCorpus *corpus);

/*
 Build BM25 and vector indexes over a corpus. The corpus may be freed
 afterwards.

 # Safety
 `corpus` must be a live handle; `out` must be writable.
 */
enum GbStatus gb_index_build(const struct GbCorpus *corpus, struct GbIndex **out);

/*
 Top `k` chunks by reciprocal rank fusion, as a JSON array.

 # Safety
 `index` must be a live handle, `query` a NUL-terminated string and `out`
 writable.
 */
enum GbStatus gb_index_search_json(const struct GbIndex *index,
                                   const char *query,
                                   size_t k,
                                   char **out);

/*
 # Safety
 `index` must be null or a handle from this library, freed once.
 */
void gb_index_free(struct GbIndex *index);

/*
 Score one transcript against its scenario with the bundled vocabulary,
 hash embedder and default metric weights. Both inputs and the output
 are JSON.

 # Safety
 Both inputs must be NUL-terminated strings; `out` must be writable.
 */
enum GbStatus gb_score_transcript_json(const char *scenario_json,
                                       const char *transcript_json,
                                       char **out);

/*
 Percentile bootstrap interval of the mean of `n` samples.

 # Safety
 `samples` must point to `n` readable doubles; `out` must be writable.
 */
enum GbStatus gb_bootstrap_ci(const double *samples,
                              size_t n,
                              size_t resamples,
                              double level,
                              uint64_t seed,
                              struct GbInterval *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GUIDEBENCH_H */
