#ifndef INDEXIFY_H
#define INDEXIFY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// What [`indexify_session_text`] returns.
typedef enum IndexifyArtifact {
  // The garden file.
  INDEXIFY_ARTIFACT_GARDEN = 0,
  // All operator tables.
  INDEXIFY_ARTIFACT_TABLES = 1,
  // Rewritten source with the table definitions.
  INDEXIFY_ARTIFACT_INDEXED_IR = 2,
  // The line-delimited report of the last run.
  INDEXIFY_ARTIFACT_REPORT = 3,
} IndexifyArtifact;

// Exploration mode for [`indexify_session_run`].
typedef enum IndexifyMode {
  INDEXIFY_MODE_INDEXED = 0,
  INDEXIFY_MODE_BASELINE_ABANDON = 1,
  INDEXIFY_MODE_BASELINE_CONCRETIZE = 2,
} IndexifyMode;

// Result code of every fallible call.
typedef enum IndexifyStatus {
  INDEXIFY_STATUS_OK = 0,
  INDEXIFY_STATUS_NULL_ARGUMENT = 1,
  INDEXIFY_STATUS_INVALID_UTF8 = 2,
  INDEXIFY_STATUS_PARSE_ERROR = 3,
  INDEXIFY_STATUS_TYPE_ERROR = 4,
  INDEXIFY_STATUS_GARDEN_ERROR = 5,
  INDEXIFY_STATUS_TABLE_ERROR = 6,
  INDEXIFY_STATUS_REWRITE_ERROR = 7,
  INDEXIFY_STATUS_INTERP_ERROR = 8,
  INDEXIFY_STATUS_IO_ERROR = 9,
  INDEXIFY_STATUS_INVALID_ARGUMENT = 10,
  // A call that needs an earlier step (a loaded program, a run) came first.
  INDEXIFY_STATUS_NOT_READY = 11,
  INDEXIFY_STATUS_PANIC = 12,
} IndexifyStatus;

// Opaque session handle.
typedef struct IndexifySession IndexifySession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string.
const char *indexify_version(void);

// Creates a session with the default configuration: strings indexed,
// k = 3, maximum string length 8.
struct IndexifySession *indexify_session_new(void);

// # Safety
// `s` must come from [`indexify_session_new`] and not be used afterwards.
// Null is ignored.
void indexify_session_free(struct IndexifySession *s);

// Message of the last failed call on this session, or an empty string. The
// pointer stays valid until the next call on the session.
//
// # Safety
// `s` must be a live session or null.
const char *indexify_session_last_error(const struct IndexifySession *s);

// Parses and type-checks `source`, replacing any earlier program and
// discarding earlier results.
//
// # Safety
// `s` must be a live session; `source` a NUL-terminated string.
enum IndexifyStatus indexify_session_load_source(struct IndexifySession *s, const char *source);

// Selects the indexed types: `"string"`, `"float"` or `"both"`.
//
// # Safety
// `s` must be a live session; `types` a NUL-terminated string.
enum IndexifyStatus indexify_session_set_types(struct IndexifySession *s, const char *types);

// Garden growth limits: builder rounds and longest admitted string.
//
// # Safety
// `s` must be a live session.
enum IndexifyStatus indexify_session_set_limits(struct IndexifySession *s,
                                                uint32_t k,
                                                size_t max_len);

// Exploration limits. A zero `timeout_ms` keeps the default of 60 s.
//
// # Safety
// `s` must be a live session.
enum IndexifyStatus indexify_session_set_explore_limits(struct IndexifySession *s,
                                                        uint32_t unroll_bound,
                                                        size_t max_paths,
                                                        uint64_t timeout_ms);

// Uses a garden in the text file format verbatim instead of growing one.
//
// # Safety
// `s` must be a live session; `garden` a NUL-terminated string.
enum IndexifyStatus indexify_session_set_garden(struct IndexifySession *s, const char *garden);

// Operators to index, one name per line. Null restores the default (every
// library operator of the indexed types).
//
// # Safety
// `s` must be a live session; `names` null or a NUL-terminated string.
enum IndexifyStatus indexify_session_set_fplus(struct IndexifySession *s, const char *names);

// Seeds (`str:` / `float:` lines) added to the harvested constants.
//
// # Safety
// `s` must be a live session; `seeds` null or a NUL-terminated string.
enum IndexifyStatus indexify_session_add_seeds(struct IndexifySession *s, const char *seeds);

// Explores the loaded program. Indexed mode indexifies it first.
//
// # Safety
// `s` must be a live session.
enum IndexifyStatus indexify_session_run(struct IndexifySession *s, enum IndexifyMode mode);

// Counts from the last run. Any output pointer may be null.
//
// # Safety
// `s` must be a live session; non-null pointers must be writable.
enum IndexifyStatus indexify_session_counts(struct IndexifySession *s,
                                            size_t *tests,
                                            size_t *assertion_failures,
                                            size_t *paths,
                                            size_t *escaped);

// Branch and statement coverage of the last run, in percent.
//
// # Safety
// `s` must be a live session; non-null pointers must be writable.
enum IndexifyStatus indexify_session_coverage(struct IndexifySession *s,
                                              double *bcov,
                                              double *icov);

// Writes a newly allocated copy of an artifact to `*out`. Garden, tables
// and IR need an indexed run.
//
// # Safety
// `s` must be a live session; `out` must be writable.
enum IndexifyStatus indexify_session_text(struct IndexifySession *s,
                                          enum IndexifyArtifact what,
                                          char **out);

// # Safety
// `p` must come from this library and not be freed twice. Null is ignored.
void indexify_string_free(char *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INDEXIFY_H */
