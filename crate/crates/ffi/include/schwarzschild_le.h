#ifndef SCHWARZSCHILD_LE_H
#define SCHWARZSCHILD_LE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SleStatus {
  SLE_STATUS_OK = 0,
  SLE_STATUS_NULL_POINTER = 1,
  SLE_STATUS_INVALID_PARAMETER = 2,
  SLE_STATUS_CONFIG = 3,
  SLE_STATUS_DOMAIN = 4,
  SLE_STATUS_INSTABILITY = 5,
  SLE_STATUS_CHECK_FAILED = 6,
  SLE_STATUS_UTF8 = 7,
  SLE_STATUS_PANIC = 8,
  SLE_STATUS_OTHER = 9,
} SleStatus;

/**
 * Scans that can be run through [`sle_verify_case`].
 */
typedef enum SleCase {
  SLE_CASE_CASE1 = 0,
  SLE_CASE_CASE2,
  SLE_CASE_CASE3_N1,
  SLE_CASE_CASE3_N2,
  SLE_CASE_CASE3_N3,
  SLE_CASE_CASE3_Q,
  SLE_CASE_CASE3_S,
  SLE_CASE_CASE3_FPRIME,
  SLE_CASE_FPRIME,
  SLE_CASE_CASE4_FPRIME,
  SLE_CASE_CASE4_LF,
  SLE_CASE_SIGN_F,
  SLE_CASE_BUDGET,
} SleCase;

/**
 * Opaque multiplier profile.
 */
typedef struct SleProfile SleProfile;

/**
 * Verdict of one scan.
 */
typedef struct SleVerdict {
  bool passed;
  double min_margin;
  double witness_r;
  size_t grid_size;
} SleVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread. Valid until the next failing
 * call on the same thread; do not free.
 */
const char *sle_last_error(void);

/**
 * Builds a profile. Pass NaN for `alpha` to use its default.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SleStatus sle_profile_new(int64_t d,
                               double r_s,
                               double eps,
                               double delta,
                               double delta0,
                               double alpha,
                               struct SleProfile **out);

/**
 * # Safety
 * `p` must come from [`sle_profile_new`] and not be used afterwards. Null is ignored.
 */
void sle_profile_free(struct SleProfile *p);

/**
 * `f`, `f'` and `l(f)` at radius `r`. Any output pointer may be null.
 *
 * # Safety
 * `p` must be a live handle; non-null outputs must be writable.
 */
enum SleStatus sle_profile_eval(const struct SleProfile *p,
                                double r,
                                double *f,
                                double *f_prime,
                                double *l_f);

/**
 * Runs one scan with `points` per region; `case_id` is an `SleCase` value.
 * A scan that completes but fails still returns `SLE_STATUS_OK`; check
 * `out->passed`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum SleStatus sle_verify_case(const struct SleProfile *p,
                               int32_t case_id,
                               size_t points,
                               struct SleVerdict *out);

/**
 * Runs a TOML configuration in memory and returns the JSON summary in
 * `json_out` (free with [`sle_string_free`]). `mode` may be null to use the
 * mode named in the configuration. Returns `SLE_STATUS_CHECK_FAILED` with the
 * summary still set when some check fails. Nothing is written to disk.
 *
 * # Safety
 * `config` must be a NUL-terminated string, `mode` null or NUL-terminated,
 * and `json_out` writable.
 */
enum SleStatus sle_run(const char *config, const char *mode, char **json_out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void sle_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCHWARZSCHILD_LE_H */
