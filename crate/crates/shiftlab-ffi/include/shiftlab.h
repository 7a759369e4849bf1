/* C interface for the shiftlab operator laboratory. */

#ifndef SHIFTLAB_H
#define SHIFTLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirroring the CLI exit codes.
 */
typedef enum ShiftlabStatus {
  ShiftlabStatus_Ok = 0,
  /**
   * A panic or misuse of the interface (null pointer, invalid UTF-8).
   */
  ShiftlabStatus_Internal = 1,
  /**
   * Scenario or report text failed to parse.
   */
  ShiftlabStatus_Parse = 2,
  /**
   * A numerical precondition failed while running experiments.
   */
  ShiftlabStatus_Precondition = 3,
  /**
   * Witness re-verification found at least one failure.
   */
  ShiftlabStatus_VerifyFailed = 4,
} ShiftlabStatus;

/**
 * Opaque report handle.
 */
typedef struct ShiftlabReport ShiftlabReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Runs scenario TOML source text. On `Ok` writes a fresh handle to `out`.
 *
 * # Safety
 * `source` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum ShiftlabStatus shiftlab_run(const char *source,
                                 bool contract,
                                 bool exact,
                                 struct ShiftlabReport **out);

/**
 * Runs a shipped scenario by name (see `shiftlab_scenario_list`).
 *
 * # Safety
 * `name` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum ShiftlabStatus shiftlab_run_named(const char *name,
                                       bool contract,
                                       bool exact,
                                       struct ShiftlabReport **out);

/**
 * Serialises a report to its canonical JSON bytes (deterministic across
 * runs of the same scenario).
 *
 * # Safety
 * `report` must come from this library; `out` must be a valid pointer.
 */
enum ShiftlabStatus shiftlab_report_json(const struct ShiftlabReport *report, char **out);

/**
 * Parses report JSON back into a handle.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum ShiftlabStatus shiftlab_report_parse(const char *json, struct ShiftlabReport **out);

/**
 * Recomputes every witness in the report. Returns `Ok` when all residuals
 * re-check, `VerifyFailed` when any does not (the failure lines, one per
 * row, are then written to `failures` when it is non-null).
 *
 * # Safety
 * `report` must come from this library; `failures` may be null.
 */
enum ShiftlabStatus shiftlab_verify(const struct ShiftlabReport *report, char **failures);

/**
 * Newline-separated names of the shipped scenarios. Free with
 * `shiftlab_string_free`. Returns null only on allocation failure.
 */
char *shiftlab_scenario_list(void);

/**
 * Message for the most recent nonzero status on this thread, or null.
 * Free with `shiftlab_string_free`.
 */
char *shiftlab_last_error(void);

/**
 * # Safety
 * `report` must be null or a handle produced by this library, not yet freed.
 */
void shiftlab_report_free(struct ShiftlabReport *report);

/**
 * # Safety
 * `s` must be null or a string produced by this library, not yet freed.
 */
void shiftlab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHIFTLAB_H */
