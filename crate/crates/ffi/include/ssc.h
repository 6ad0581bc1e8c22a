#ifndef SSC_H
#define SSC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SscStatus {
  SSC_STATUS_OK = 0,
  SSC_STATUS_NULL_POINTER = 1,
  SSC_STATUS_INVALID_UTF8 = 2,
  SSC_STATUS_PARSE = 3,
  SSC_STATUS_INVALID_PATTERN = 4,
  SSC_STATUS_DIMENSION = 5,
  SSC_STATUS_MISSING_STATE_DIM = 6,
  SSC_STATUS_BUDGET_EXCEEDED = 7,
  SSC_STATUS_UNKNOWN_COMMAND = 8,
  SSC_STATUS_PANIC = 9,
} SscStatus;

typedef enum SscVerdict {
  // Both graphs colorable: every member of the class is controllable.
  SSC_VERDICT_SUFFICIENT_CONTROLLABLE = 0,
  // The graph test failed and sampling found no counterexample.
  SSC_VERDICT_INCONCLUSIVE = 2,
  // A sampled member fails the Kalman test.
  SSC_VERDICT_REFUTED_BY_SAMPLE = 3,
} SscVerdict;

// Parsed document. Opaque to C.
typedef struct SscPattern SscPattern;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a document (text format or JSON envelope). On success `*out`
// receives a handle to release with `ssc_pattern_free`.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum SscStatus ssc_pattern_parse(const char *text, struct SscPattern **out);

// # Safety
// `p` must come from `ssc_pattern_parse` and not be used afterwards.
void ssc_pattern_free(struct SscPattern *p);

// # Safety
// `p` must be a live handle or null.
size_t ssc_pattern_rows(const struct SscPattern *p);

// # Safety
// `p` must be a live handle or null.
size_t ssc_pattern_cols(const struct SscPattern *p);

// State dimension from the header, or 0 if absent.
//
// # Safety
// `p` must be a live handle or null.
size_t ssc_pattern_state_dim(const struct SscPattern *p);

// Matching test on a square matrix.
//
// # Safety
// `p` must be a live handle and `out` a valid pointer.
enum SscStatus ssc_is_nonsingular(const struct SscPattern *p, bool *out);

// Colorability of the matrix graph. With `greedy`, `false` is not
// conclusive.
//
// # Safety
// `p` must be a live handle and `out` a valid pointer.
enum SscStatus ssc_is_colorable(const struct SscPattern *p, bool greedy, bool *out);

// Graph test on `[A B]` and the barred matrix, then `trials` seeded
// realizations when inconclusive. Needs a state dimension in the header.
//
// # Safety
// `p` must be a live handle and `out` a valid pointer.
enum SscStatus ssc_check_controllability(const struct SscPattern *p,
                                         uint64_t seed,
                                         size_t trials,
                                         enum SscVerdict *out);

// The JSON report the `ssc` command line prints for `command` on this
// document. `trials` of 0 selects the command's default. `*exit_code`
// receives the command line's exit code and `*out` a string to release with
// `ssc_string_free`.
//
// # Safety
// `p` must be a live handle, `command` a NUL-terminated string, and
// `exit_code` and `out` valid pointers.
enum SscStatus ssc_report_json(const struct SscPattern *p,
                               const char *command,
                               uint64_t seed,
                               size_t trials,
                               int32_t *exit_code,
                               char **out);

// # Safety
// `s` must come from this library and not be used afterwards.
void ssc_string_free(char *s);

// Copy of the last error on this thread, or null. Release with
// `ssc_string_free`.
char *ssc_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SSC_H */
