#ifndef ST_H
#define ST_H

/* Generated by cbindgen from the st-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * What happened to the last call. `Ok` and `Fail` are outcomes; the rest
 * are errors with a message available from `st_engine_last_error`.
 */
typedef enum StStatus {
  /**
   * The call succeeded.
   */
  ST_STATUS_OK = 0,
  /**
   * The strategy signalled failure on the given term (not an error).
   */
  ST_STATUS_FAIL = 1,
  /**
   * A rule package, script, strategy, or term failed to parse.
   */
  ST_STATUS_PARSE_ERROR = 2,
  /**
   * The run aborted: a strategy failed or an expectation did not hold.
   */
  ST_STATUS_RUN_ERROR = 3,
  /**
   * The configured time limit was exceeded.
   */
  ST_STATUS_TIME_LIMIT = 4,
  /**
   * A null pointer or invalid UTF-8 was passed in.
   */
  ST_STATUS_INVALID_ARGUMENT = 5,
  /**
   * The engine panicked; this is a bug in the library.
   */
  ST_STATUS_INTERNAL_ERROR = 6,
} StStatus;

/**
 * An engine instance: declared rules, boundedness facts, and the
 * configured time limit. Create with `st_engine_new`, release with
 * `st_engine_free`.
 */
typedef struct StEngine StEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an engine with no rules and no time limit.
 */
struct StEngine *st_engine_new(void);

/**
 * Releases an engine. A null handle is a no-op.
 *
 * # Safety
 * `engine` must be null or a pointer from `st_engine_new` that has not
 * been freed already.
 */
void st_engine_free(struct StEngine *engine);

/**
 * Sets the wall-clock budget for subsequent runs, in microseconds.
 * Zero removes the limit.
 *
 * # Safety
 * `engine` must be a live engine handle.
 */
enum StStatus st_engine_set_time_limit_us(struct StEngine *engine, uint64_t micros);

/**
 * Loads a rule package (declarations and `bounded` directives) into the
 * engine. Later packages may reference earlier declarations.
 *
 * # Safety
 * `engine` must be a live engine handle and `src` a NUL-terminated
 * string.
 */
enum StStatus st_engine_load_rules(struct StEngine *engine, const char *src);

/**
 * Parses and runs a proof script against the engine's rules. On success
 * `result` (if non-null) receives the rendered final term; free it with
 * `st_string_free`. The script's declarations stay in the engine.
 *
 * # Safety
 * `engine` must be a live engine handle, `src` a NUL-terminated string,
 * and `result` null or a valid location to store a string.
 */
enum StStatus st_engine_run_script(struct StEngine *engine, const char *src, char **result);

/**
 * Evaluates one strategy expression on one term. `Ok` stores the
 * rewritten term in `result` (if non-null); `Fail` reports that the
 * strategy signalled failure and stores nothing.
 *
 * # Safety
 * `engine` must be a live engine handle, `strategy` and `term`
 * NUL-terminated strings, and `result` null or a valid location to
 * store a string.
 */
enum StStatus st_engine_apply(struct StEngine *engine,
                              const char *strategy,
                              const char *term,
                              char **result);

/**
 * The message for the engine's most recent non-`Ok` status; the empty
 * string when the last call succeeded. The pointer is owned by the
 * engine and is invalidated by the next call on the same handle.
 *
 * # Safety
 * `engine` must be a live engine handle.
 */
const char *st_engine_last_error(const struct StEngine *engine);

/**
 * Releases a string returned through a `result` out-parameter. A null
 * pointer is a no-op.
 *
 * # Safety
 * `s` must be null or a string obtained from this library that has not
 * been freed already.
 */
void st_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ST_H */
