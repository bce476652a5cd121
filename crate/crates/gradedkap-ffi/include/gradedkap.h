/* C interface to the gradedkap exact computation engine. */

#ifndef GRADEDKAP_H
#define GRADEDKAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; nonzero values match the CLI exit codes where one exists.
 */
typedef enum GkStatus {
  GkStatus_Ok = 0,
  GkStatus_CheckFailed = 1,
  GkStatus_InvalidInput = 2,
  GkStatus_Internal = 3,
  GkStatus_NullArgument = 4,
} GkStatus;

/**
 * Opaque engine handle: a parsed and validated input document.
 */
typedef struct GkEngine GkEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a JSON document into an engine handle. On success writes the
 * handle to `out` and returns `Ok`; the caller releases it with
 * `gk_engine_free`.
 *
 * # Safety
 * `json` must point to a NUL-terminated string and `out` to writable
 * storage for one pointer.
 */
enum GkStatus gk_engine_new(const char *json, struct GkEngine **out);

/**
 * Releases an engine handle. A null handle is ignored.
 *
 * # Safety
 * `engine` must be a pointer returned by `gk_engine_new` that has not
 * been freed already.
 */
void gk_engine_free(struct GkEngine *engine);

/**
 * The error message of the last failing call on this thread, as an owned
 * string to release with `gk_string_free`; null when no error was
 * recorded.
 */
char *gk_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `text` must have been returned by a gradedkap function and not freed
 * already.
 */
void gk_string_free(char *text);

/**
 * Runs the homological check; writes the JSON report. Returns
 * `CheckFailed` when the table is not homological (the report still
 * carries the witness).
 *
 * # Safety
 * `engine` must be a live handle from `gk_engine_new`; `report_json`
 * must be writable.
 */
enum GkStatus gk_engine_check(const struct GkEngine *engine, char **report_json);

/**
 * Computes the Atiyah cocycle of the document's connection and the
 * class-vanishing verdict; writes the JSON report.
 *
 * # Safety
 * As for `gk_engine_check`.
 */
enum GkStatus gk_engine_atiyah(const struct GkEngine *engine, char **report_json);

/**
 * Computes the bracket tower through both routes up to `max_arity`
 * (0 keeps the document's cap) and writes the JSON report.
 *
 * # Safety
 * As for `gk_engine_check`.
 */
enum GkStatus gk_engine_brackets(const struct GkEngine *engine,
                                 uint32_t max_arity,
                                 char **report_json);

/**
 * Runs a verification suite ("all", "pbw", "jacobi", "recursion",
 * "fedosov", "connections", "closedform") and writes the JSON report;
 * returns `Internal` when an exact identity fails.
 *
 * # Safety
 * As for `gk_engine_check`, plus `suite` must be NUL-terminated.
 */
enum GkStatus gk_engine_verify(const struct GkEngine *engine,
                               const char *suite,
                               char **report_json);

/**
 * Computes cohomology of a built-in module ("trivial", "adjoint",
 * "coadjoint", "atiyah") in one internal degree; writes the JSON report.
 *
 * # Safety
 * As for `gk_engine_check`, plus `module` must be NUL-terminated.
 */
enum GkStatus gk_engine_cohomology(const struct GkEngine *engine,
                                   const char *module,
                                   int64_t degree,
                                   char **report_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* GRADEDKAP_H */
