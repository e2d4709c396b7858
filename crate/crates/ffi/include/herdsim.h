#ifndef HERDSIM_H
#define HERDSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HerdStatus {
  HERD_STATUS_OK = 0,
  HERD_STATUS_NULL_POINTER = -1,
  HERD_STATUS_INVALID_UTF8 = -2,
  HERD_STATUS_PARSE_ERROR = -3,
  HERD_STATUS_CONSTRAINT_VIOLATION = -4,
  HERD_STATUS_HORIZON_ERROR = -5,
  HERD_STATUS_INVALID_ARGUMENT = -6,
  HERD_STATUS_INTERNAL = -255,
} HerdStatus;

/**
 * Opaque handle to a loaded configuration.
 */
typedef struct HerdSession HerdSession;

/**
 * Monte Carlo estimate with a 95% Wilson interval.
 */
typedef struct HerdMonteCarlo {
  uint64_t runs;
  uint64_t hits;
  double frequency;
  double std_error;
  double ci_low;
  double ci_high;
} HerdMonteCarlo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads a session from TOML text. On success `*out` receives a handle to
 * release with `herd_session_free`.
 */
enum HerdStatus herd_session_new(const char *toml, struct HerdSession **out);

/**
 * Loads one of the configs shipped with the library, such as `example1a`.
 */
enum HerdStatus herd_session_bundled(const char *name, struct HerdSession **out);

void herd_session_free(struct HerdSession *session);

/**
 * Horizon the session uses when a call passes 0.
 */
size_t herd_session_horizon(const struct HerdSession *session);

/**
 * Exact probability of `event`, optionally conditioned on `condition`
 * (may be null). `out_exact`, if not null, receives the fraction as text.
 */
enum HerdStatus herd_exact_probability(const struct HerdSession *session,
                                       const char *event_text,
                                       const char *condition_text,
                                       size_t horizon,
                                       double *out_value,
                                       char **out_exact);

/**
 * Condition report as JSON.
 */
enum HerdStatus herd_check_conditions_json(const struct HerdSession *session,
                                           size_t horizon,
                                           char **out);

/**
 * Per-period beliefs and strategies along `history` (e.g. `"LRR"`) as JSON.
 */
enum HerdStatus herd_trace_json(const struct HerdSession *session, const char *history, char **out);

/**
 * Simulated frequency of `event` over `runs` independent plays.
 */
enum HerdStatus herd_monte_carlo(const struct HerdSession *session,
                                 const char *event_text,
                                 size_t horizon,
                                 uint64_t runs,
                                 uint64_t seed,
                                 struct HerdMonteCarlo *out);

/**
 * Discounted expected share of correct actions, `delta` given as text
 * such as `"9/10"`.
 */
enum HerdStatus herd_discounted_correct(const struct HerdSession *session,
                                        const char *delta,
                                        size_t horizon,
                                        double *out_value);

void herd_string_free(char *s);

/**
 * Message for the last failed call on this thread; empty after success.
 * Valid until the next library call on the same thread.
 */
const char *herd_last_error(void);

const char *herd_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HERDSIM_H */
