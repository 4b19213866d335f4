/* C interface for the heislorentz library. Generated by cbindgen; do not edit. */

#ifndef HEISLORENTZ_H
#define HEISLORENTZ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum HlStatus {
  /**
   * The call succeeded.
   */
  HL_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  HL_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  HL_STATUS_INVALID_UTF8 = 2,
  /**
   * The command or configuration was rejected; see [`hl_last_error`].
   */
  HL_STATUS_CONFIG = 3,
  /**
   * The run aborted on a numerical or structural failure.
   */
  HL_STATUS_FAILED = 4,
  /**
   * An internal invariant was violated; see [`hl_last_error`].
   */
  HL_STATUS_INTERNAL = 5,
} HlStatus;

/**
 * Opaque result of one verification run.
 *
 * Create with [`hl_run`], inspect with the `hl_report_*` accessors, release
 * with [`hl_report_free`].
 */
typedef struct HlReport HlReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hl_version(void);

/**
 * Convention stamp describing the sign and ordering choices behind every
 * reported number, as a static NUL-terminated string.
 */
const char *hl_convention(void);

/**
 * Message of the most recent failure on the calling thread, or NULL if the
 * last call succeeded. The pointer is valid until the next failing call on
 * the same thread.
 */
const char *hl_last_error(void);

/**
 * Runs `command` against `config_json` and stores a new report handle in
 * `out_report`.
 *
 * `command` is one of `validate`, `metric`, `killing`, `quotient`,
 * `equivalence`, `rigidity`, or `example <name>`. `config_json` may be NULL
 * for the built-in defaults. On any status other than `HL_STATUS_OK`,
 * `*out_report` is NULL and [`hl_last_error`] describes the problem. A
 * report produced from a run whose checks failed still returns
 * `HL_STATUS_OK` here; the outcome is read with [`hl_report_passed`].
 *
 * # Safety
 *
 * `command` and (when non-NULL) `config_json` must point to NUL-terminated
 * strings, and `out_report` must point to writable memory for one pointer.
 */
enum HlStatus hl_run(const char *command, const char *config_json, struct HlReport **out_report);

/**
 * 1 if every check in the report passed, 0 if any failed, -1 on NULL.
 *
 * # Safety
 *
 * `report` must be NULL or a handle from [`hl_run`] not yet freed.
 */
int hl_report_passed(const struct HlReport *report);

/**
 * Number of checks the report carries, or -1 on NULL.
 *
 * # Safety
 *
 * `report` must be NULL or a handle from [`hl_run`] not yet freed.
 */
int hl_report_check_count(const struct HlReport *report);

/**
 * Full report as NUL-terminated JSON, or NULL on NULL input. The pointer is
 * owned by the handle and is valid until [`hl_report_free`].
 *
 * # Safety
 *
 * `report` must be NULL or a handle from [`hl_run`] not yet freed.
 */
const char *hl_report_json(const struct HlReport *report);

/**
 * Releases a report handle. NULL is ignored; freeing twice is undefined.
 *
 * # Safety
 *
 * `report` must be NULL or a handle from [`hl_run`] not yet freed.
 */
void hl_report_free(struct HlReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEISLORENTZ_H */
