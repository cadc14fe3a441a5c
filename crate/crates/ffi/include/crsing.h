#ifndef CRSING_H
#define CRSING_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes. `NotCertified` is a verdict, not a failure: the output
 arguments are still filled in.
 */
typedef enum CrsStatus {
  CRS_STATUS_OK = 0,
  CRS_STATUS_NOT_CERTIFIED = 1,
  CRS_STATUS_NULL_POINTER = 2,
  CRS_STATUS_INVALID_ARGUMENT = 3,
  CRS_STATUS_SCHEMA = 4,
  CRS_STATUS_JSON = 5,
  CRS_STATUS_DOMAIN = 6,
  CRS_STATUS_NO_RADIUS = 7,
  CRS_STATUS_SOLVER = 8,
  CRS_STATUS_IO = 9,
  CRS_STATUS_PANIC = 10,
} CrsStatus;

/*
 The Δ sheets of a certified surface.
 */
typedef struct CrsSheets CrsSheets;

/*
 A validated surface germ.
 */
typedef struct CrsSurface CrsSurface;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. Valid until the
 next failing call on the same thread.
 */
const char *crs_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *crs_version(void);

/*
 Parses a surface from its JSON description.

 # Safety
 `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CrsStatus crs_surface_from_json(const char *json, struct CrsSurface **out);

/*
 Releases a surface. NULL is ignored.

 # Safety
 `s` must come from [`crs_surface_from_json`] and not be freed twice.
 */
void crs_surface_free(struct CrsSurface *s);

/*
 Evaluates `τ_M` at `z = re + i im`.

 # Safety
 `s` must be a live surface handle; the output pointers must be writable.
 */
enum CrsStatus crs_surface_tau(const struct CrsSurface *s,
                               size_t m,
                               double re,
                               double im,
                               double *out_re,
                               double *out_im);

/*
 Runs the certificate and returns its JSON report. Returns `Ok` when the
 surface is certified and `NotCertified` otherwise; the report is written
 in both cases.

 # Safety
 `s` must be a live surface handle and `out_json` writable.
 */
enum CrsStatus crs_certify_json(const struct CrsSurface *s, size_t samples, char **out_json);

/*
 Certifies the surface and builds its sheets.

 # Safety
 `s` must be a live surface handle and `out` writable.
 */
enum CrsStatus crs_sheets_build(const struct CrsSurface *s, size_t samples, struct CrsSheets **out);

/*
 Releases a sheet system. NULL is ignored.

 # Safety
 `h` must come from [`crs_sheets_build`] and not be freed twice.
 */
void crs_sheets_free(struct CrsSheets *h);

/*
 Number of sheets Δ, or 0 for a NULL handle.

 # Safety
 `h` must be NULL or a live handle.
 */
size_t crs_sheets_count(const struct CrsSheets *h);

/*
 Radius of the disc on which the sheets are defined, or NaN for NULL.

 # Safety
 `h` must be NULL or a live handle.
 */
double crs_sheets_validity_radius(const struct CrsSheets *h);

/*
 Evaluates sheet `j` (`1 <= j <= Δ`) at `z = re + i im`.

 # Safety
 `h` must be a live handle; the output pointers must be writable.
 */
enum CrsStatus crs_sheets_eval(const struct CrsSheets *h,
                               size_t j,
                               double re,
                               double im,
                               double *out_re,
                               double *out_im);

/*
 `|∂F/∂z̄|² - |∂F/∂z|²` of the normalized sheet at `z`.

 # Safety
 `h` must be a live handle and `out` writable.
 */
enum CrsStatus crs_sheets_jacobian_gap(const struct CrsSheets *h,
                                       double re,
                                       double im,
                                       double *out);

/*
 Polynomial-hull probe. `samples` holds `n` points as consecutive
 `(z.re, z.im, w.re, w.im)` quadruples and `probe` one more quadruple.
 Writes `m_1 .. m_{d_max}` into `m_values` (length `d_max`) and sets
 `*outside` to 1 when some degree separates the probe.

 # Safety
 `samples` must hold `4 n` doubles, `probe` 4, `m_values` `d_max`.
 */
enum CrsStatus crs_hull_probe(const double *samples,
                              size_t n,
                              const double *probe,
                              uint32_t d_max,
                              double *m_values,
                              int32_t *outside);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not be freed twice.
 */
void crs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRSING_H */
