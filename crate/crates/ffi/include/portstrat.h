#ifndef PORTSTRAT_H
#define PORTSTRAT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every call.
 */
typedef enum PortstratStatus {
  PORTSTRAT_STATUS_OK = 0,
  PORTSTRAT_STATUS_NULL_ARGUMENT = 1,
  PORTSTRAT_STATUS_INVALID_UTF8 = 2,
  PORTSTRAT_STATUS_PARSE_ERROR = 3,
  PORTSTRAT_STATUS_INVALID_GRAPH = 4,
  PORTSTRAT_STATUS_STRATEGY_ERROR = 5,
  PORTSTRAT_STATUS_BUDGET_EXHAUSTED = 6,
  PORTSTRAT_STATUS_ENGINE_ERROR = 7,
  PORTSTRAT_STATUS_NO_GRAPH = 8,
  PORTSTRAT_STATUS_PANIC = 9,
} PortstratStatus;

/*
 How a run ended.
 */
typedef enum PortstratOutcome {
  PORTSTRAT_OUTCOME_ID = 0,
  PORTSTRAT_OUTCOME_FAIL = 1,
} PortstratOutcome;

/*
 Opaque session handle.
 */
typedef struct PortstratSession PortstratSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Creates an empty session. Free it with `portstrat_session_free`.
 */
struct PortstratSession *portstrat_session_new(void);

/*
 Frees a session; null is ignored.

 # Safety
 `s` must come from `portstrat_session_new` and not be freed twice.
 */
void portstrat_session_free(struct PortstratSession *s);

/*
 Adds the rules, signature and agent declarations of a rule file.

 # Safety
 `s` is a live session and `rules` a nul-terminated string.
 */
enum PortstratStatus portstrat_session_add_rules(struct PortstratSession *s, const char *rules);

/*
 Replaces the current graph. The graph may use the signature of rules
 added earlier.

 # Safety
 `s` is a live session and `graph` a nul-terminated string.
 */
enum PortstratStatus portstrat_session_set_graph(struct PortstratSession *s, const char *graph);

/*
 Runs a strategy on the current graph, which becomes the result. On
 success `*outcome` receives how the run ended; `outcome` may be null.

 # Safety
 `s` is a live session, `strategy` a nul-terminated string and `outcome`
 null or writable.
 */
enum PortstratStatus portstrat_session_run(struct PortstratSession *s,
                                           const char *strategy,
                                           uint64_t seed,
                                           uint64_t max_steps,
                                           enum PortstratOutcome *outcome);

/*
 The current graph in the text format, or null when none is loaded.

 # Safety
 `s` is a live session. Free the result with `portstrat_string_free`.
 */
char *portstrat_session_graph_text(const struct PortstratSession *s);

/*
 The trace of the last run, or null before the first run.

 # Safety
 `s` is a live session. Free the result with `portstrat_string_free`.
 */
char *portstrat_session_trace_text(const struct PortstratSession *s);

/*
 Message for the last failed call, or null. Owned by the session and
 valid until the next call on it.

 # Safety
 `s` is a live session.
 */
const char *portstrat_session_last_error(const struct PortstratSession *s);

/*
 Frees a string returned by this library; null is ignored.

 # Safety
 `p` must come from this library and not be freed twice.
 */
void portstrat_string_free(char *p);

/*
 Library version, a static string.
 */
const char *portstrat_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PORTSTRAT_H */
