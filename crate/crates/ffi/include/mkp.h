#ifndef MKP_H
#define MKP_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Deliberate corruption applied by `mkp_run`.
 */
typedef enum MkpNegativeControl {
  MKP_NEGATIVE_CONTROL_NONE = 0,
  MKP_NEGATIVE_CONTROL_EPS_SIGN = 1,
  MKP_NEGATIVE_CONTROL_SCHUR_COEFFICIENT = 2,
} MkpNegativeControl;

/**
 * Status codes. 0-3 match the `mkp` exit codes.
 */
typedef enum MkpStatus {
  MKP_STATUS_OK = 0,
  /**
   * A run completed and some residual was nonzero.
   */
  MKP_STATUS_RESIDUAL = 1,
  MKP_STATUS_CONFIG = 2,
  /**
   * The tau table changed when the mode window was enlarged.
   */
  MKP_STATUS_UNSTABLE = 3,
  MKP_STATUS_PARSE = 4,
  MKP_STATUS_NULL_ARGUMENT = 5,
  MKP_STATUS_IO = 6,
  /**
   * A vanishing `tau^p(0)` made a division impossible.
   */
  MKP_STATUS_NON_NORMALIZABLE = 7,
  MKP_STATUS_INTERNAL = 8,
} MkpStatus;

/**
 * Opaque report handle.
 */
typedef struct MkpReport MkpReport;

/**
 * Opaque scenario handle.
 */
typedef struct MkpScenario MkpScenario;

/**
 * Opaque tau table handle.
 */
typedef struct MkpTauTable MkpTauTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next library call on the same thread; do not free.
 */
const char *mkp_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void mkp_string_free(char *s);

/**
 * The default three-component scenario with three random factors.
 */
struct MkpScenario *mkp_scenario_default(uint64_t seed);

/**
 * Parses a scenario from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MkpStatus mkp_scenario_from_json(const char *json, struct MkpScenario **out);

/**
 * Loads a scenario file; relative Clifford files resolve against it.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum MkpStatus mkp_scenario_load(const char *path, struct MkpScenario **out);

/**
 * Checks every scenario parameter without computing anything.
 *
 * # Safety
 * `s` must be a live scenario handle.
 */
enum MkpStatus mkp_scenario_validate(const struct MkpScenario *s);

/**
 * # Safety
 * `s` must be a live scenario handle.
 */
enum MkpStatus mkp_scenario_set_seed(struct MkpScenario *s, uint64_t seed);

/**
 * # Safety
 * `s` must be a live scenario handle.
 */
enum MkpStatus mkp_scenario_set_degree(struct MkpScenario *s, uint32_t degree);

/**
 * Comma-separated check ids, or `all`.
 *
 * # Safety
 * `s` must be a live scenario handle; `suite` a NUL-terminated string.
 */
enum MkpStatus mkp_scenario_set_suite(struct MkpScenario *s, const char *suite);

/**
 * The scenario as JSON, or NULL for a NULL handle.
 *
 * # Safety
 * `s` must be NULL or a live scenario handle.
 */
char *mkp_scenario_to_json(const struct MkpScenario *s);

/**
 * # Safety
 * `s` must be NULL or a handle from this library, not yet freed.
 */
void mkp_scenario_free(struct MkpScenario *s);

/**
 * Computes the scenario's tau table (after the window-stability gate).
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
enum MkpStatus mkp_tau_table_compute(const struct MkpScenario *s, struct MkpTauTable **out);

/**
 * `tau^p_{alpha beta}` as text (`1 + 2*t[1,1]`), or NULL on error.
 *
 * # Safety
 * `t` must be a live tau table handle.
 */
char *mkp_tau_table_entry(const struct MkpTauTable *t, int64_t p, size_t alpha, size_t beta);

/**
 * The whole table as JSON.
 *
 * # Safety
 * `t` must be NULL or a live tau table handle.
 */
char *mkp_tau_table_to_json(const struct MkpTauTable *t);

/**
 * # Safety
 * `t` must be NULL or a handle from this library, not yet freed.
 */
void mkp_tau_table_free(struct MkpTauTable *t);

/**
 * Runs the scenario's checks. On success `*out` holds the report and the
 * return value is its exit status (`Ok`, `Residual` or `Unstable`).
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
enum MkpStatus mkp_run(const struct MkpScenario *s,
                       enum MkpNegativeControl control,
                       struct MkpReport **out);

/**
 * 1 if every selected check passed, 0 otherwise (or for NULL).
 *
 * # Safety
 * `r` must be NULL or a live report handle.
 */
int32_t mkp_report_passed(const struct MkpReport *r);

/**
 * Same code the CLI would exit with; 2 for NULL.
 *
 * # Safety
 * `r` must be NULL or a live report handle.
 */
int32_t mkp_report_exit_code(const struct MkpReport *r);

/**
 * Number of residuals that failed.
 *
 * # Safety
 * `r` must be NULL or a live report handle.
 */
size_t mkp_report_failures(const struct MkpReport *r);

/**
 * # Safety
 * `r` must be NULL or a live report handle.
 */
char *mkp_report_to_json(const struct MkpReport *r);

/**
 * # Safety
 * `r` must be NULL or a live report handle.
 */
char *mkp_report_to_text(const struct MkpReport *r);

/**
 * # Safety
 * `r` must be NULL or a handle from this library, not yet freed.
 */
void mkp_report_free(struct MkpReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MKP_H */
