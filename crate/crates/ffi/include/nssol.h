#ifndef NSSOL_H
#define NSSOL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every entry point.
 */
typedef enum NssolStatus {
  NSSOL_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  NSSOL_STATUS_NULL_POINTER = 1,
  /*
   A string argument was not valid UTF-8.
   */
  NSSOL_STATUS_INVALID_UTF8 = 2,
  /*
   The configuration JSON could not be parsed.
   */
  NSSOL_STATUS_PARSE_ERROR = 3,
  /*
   The parameters violate a family constraint.
   */
  NSSOL_STATUS_VALIDATION_ERROR = 4,
  /*
   A point lies outside the solution's domain.
   */
  NSSOL_STATUS_DOMAIN_ERROR = 5,
  /*
   Integration, tabulation or differencing failed.
   */
  NSSOL_STATUS_NUMERIC_ERROR = 6,
  /*
   An argument is out of range (bad grid, missing section).
   */
  NSSOL_STATUS_INVALID_ARGUMENT = 7,
  /*
   A panic was caught at the boundary.
   */
  NSSOL_STATUS_PANIC = 8,
} NssolStatus;

/*
 A residual report.
 */
typedef struct NssolReport NssolReport;

/*
 A constructed self-similar solution.
 */
typedef struct NssolSolution NssolSolution;

/*
 Flat copy of the first-resolution numbers of a report. Orders are NaN
 when they could not be estimated.
 */
typedef struct NssolReportSummary {
  double h_t;
  double h_r;
  double mass_linf;
  double mass_l2;
  double mom_linf;
  double mom_l2;
  double order_mass;
  double order_mom;
  uint64_t mass_skipped;
  uint64_t mom_skipped;
} NssolReportSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or null if there was none.
 The pointer stays valid until the next failing call on this thread.
 */
const char *nssol_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *nssol_version(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed already.
 */
void nssol_string_free(char *s);

/*
 Similarity exponent `2/(gamma N - N + 2)`.

 # Safety
 `out_s` must be a valid pointer to a double.
 */
enum NssolStatus nssol_derived_s(uint32_t dim, double gamma, double *out_s);

/*
 Validates the `model` and `family` of a configuration and writes the
 outcome as JSON. Returns `VALIDATION_ERROR` (with the JSON still
 written) when a constraint is violated.

 # Safety
 `config_json` must be a NUL-terminated string; `out_json` a valid
 pointer. The returned string is freed with [`nssol_string_free`].
 */
enum NssolStatus nssol_validate_json(const char *config_json, char **out_json);

/*
 Builds a solution from a configuration. Numeric scaling functions are
 integrated on `[0, t_end]`; `t_end <= 0` uses the configuration's
 `scaling.t_end`, or 1.

 # Safety
 `config_json` must be a NUL-terminated string; `out` a valid pointer.
 */
enum NssolStatus nssol_solution_from_json(const char *config_json,
                                          double t_end,
                                          struct NssolSolution **out);

/*
 Releases a solution. Null is ignored.

 # Safety
 `sol` must come from [`nssol_solution_from_json`] and not be used
 afterwards.
 */
void nssol_solution_free(struct NssolSolution *sol);

/*
 Density and velocity at `(t, r)`.

 # Safety
 `sol` must be a live handle; `rho` and `u` valid pointers.
 */
enum NssolStatus nssol_solution_eval_point(const struct NssolSolution *sol,
                                           double t,
                                           double r,
                                           double *rho,
                                           double *u);

/*
 Fields on the grid `t[0..nt] x r[0..nr]`, written time-major into
 `rho_out` and `u_out`, each of length `nt * nr`. Nothing is written on
 failure.

 # Safety
 All arrays must be valid for the stated lengths.
 */
enum NssolStatus nssol_solution_eval_grid(const struct NssolSolution *sol,
                                          const double *t,
                                          size_t nt,
                                          const double *r,
                                          size_t nr,
                                          double *rho_out,
                                          double *u_out);

/*
 Profile value and slope at `z`.

 # Safety
 `sol` must be a live handle; `y` and `dy` valid pointers.
 */
enum NssolStatus nssol_solution_profile_eval(const struct NssolSolution *sol,
                                             double z,
                                             double *y,
                                             double *dy);

/*
 `a(t)` and `a'(t)`.

 # Safety
 `sol` must be a live handle; `a` and `adot` valid pointers.
 */
enum NssolStatus nssol_solution_scaling_eval(const struct NssolSolution *sol,
                                             double t,
                                             double *a,
                                             double *adot);

/*
 Time at which `a` reaches zero. `*has_value` is set to 0 when `a` does
 not vanish on the integrated span, and `*t` is then left unchanged.

 # Safety
 `sol` must be a live handle; `t` and `has_value` valid pointers.
 */
enum NssolStatus nssol_solution_vanishing_time(const struct NssolSolution *sol,
                                               double *t,
                                               int32_t *has_value);

/*
 Runs the residual verifier with the configuration's `verify` section.

 # Safety
 `config_json` must be a NUL-terminated string; `out` a valid pointer.
 */
enum NssolStatus nssol_verify_json(const char *config_json, struct NssolReport **out);

/*
 Releases a report. Null is ignored.

 # Safety
 `rep` must come from [`nssol_verify_json`] and not be used afterwards.
 */
void nssol_report_free(struct NssolReport *rep);

/*
 # Safety
 `rep` must be a live handle; `out` a valid pointer.
 */
enum NssolStatus nssol_report_summary(const struct NssolReport *rep,
                                      struct NssolReportSummary *out);

/*
 Full report, all resolutions included, as JSON.

 # Safety
 `rep` must be a live handle; `out_json` a valid pointer. The returned
 string is freed with [`nssol_string_free`].
 */
enum NssolStatus nssol_report_to_json(const struct NssolReport *rep, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSSOL_H */
