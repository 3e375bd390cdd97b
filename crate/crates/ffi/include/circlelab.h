/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef CIRCLELAB_H
#define CIRCLELAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a fallible call.
typedef enum ClStatus {
  CL_STATUS_OK = 0,
  // A required pointer argument was null.
  CL_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  CL_STATUS_INVALID_UTF8 = 2,
  // The input was rejected: bad config, generator, word or argument.
  CL_STATUS_INVALID_INPUT = 3,
  // A numerical routine failed on valid input.
  CL_STATUS_NUMERICAL = 4,
  // An output buffer was too small.
  CL_STATUS_BUFFER_TOO_SMALL = 5,
  // A Rust panic was caught at the boundary.
  CL_STATUS_PANIC = 6,
} ClStatus;

// A set of Möbius generators named `A`, `B`, … in order.
typedef struct ClAlphabet ClAlphabet;

// A parsed experiment config.
typedef struct ClConfig ClConfig;

// The report of one scenario run.
typedef struct ClReport ClReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *cl_version(void);

// Copies the last error message of this thread into `buf`.
//
// Returns the buffer size needed including the terminating NUL, or 0 when
// there is no error. Nothing is written if `buf` is null or `len` is too small.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t cl_last_error(char *buf, size_t len);

// Parses TOML config text.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum ClStatus cl_config_parse(const char *text, struct ClConfig **out);

// Loads a bundled example config by name.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum ClStatus cl_config_builtin(const char *name, struct ClConfig **out);

// # Safety
// `config` must be null or come from `cl_config_parse`/`cl_config_builtin`, and not be used afterwards.
void cl_config_free(struct ClConfig *config);

// Runs the config's scenario with the given seed and returns its report.
//
// # Safety
// `config` must be a live config handle and `out` a valid pointer.
enum ClStatus cl_run(const struct ClConfig *config, uint64_t seed, struct ClReport **out);

// The report as JSON, owned by the report and valid until `cl_report_free`.
//
// # Safety
// `report` must be a live report handle.
const char *cl_report_json(const struct ClReport *report);

// 1 if every invariant of the report holds, 0 if one fails, -1 for a null handle.
//
// # Safety
// `report` must be null or a live report handle.
int32_t cl_report_all_hold(const struct ClReport *report);

// # Safety
// `report` must be null or come from `cl_run`, and not be used afterwards.
void cl_report_free(struct ClReport *report);

// Builds an alphabet from `count` row-major 2×2 matrices stored back to back.
//
// # Safety
// `matrices` must point to `4 * count` doubles and `out` be a valid pointer.
enum ClStatus cl_alphabet_new(const double *matrices, size_t count, struct ClAlphabet **out);

// # Safety
// `alphabet` must be null or come from `cl_alphabet_new`, and not be used afterwards.
void cl_alphabet_free(struct ClAlphabet *alphabet);

// Value and first three derivatives of a word such as `"A B^-1"` at `x`.
//
// # Safety
// `alphabet` must be a live handle, `word` a NUL-terminated string and `jet` point to 4 writable doubles.
enum ClStatus cl_word_jet(const struct ClAlphabet *alphabet,
                          const char *word,
                          double x,
                          double *jet);

// Smaller positive root of `κ^{1/τ} e^{-κ} = gap`.
//
// # Safety
// `out` must be a valid pointer.
enum ClStatus cl_kappa_m_solve(double gap, double tau, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CIRCLELAB_H */
