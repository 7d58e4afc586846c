#ifndef FWLAB_H
#define FWLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FwStatus {
  FW_STATUS_OK = 0,
  FW_STATUS_NULL_POINTER = 1,
  FW_STATUS_PARAMETER = 2,
  FW_STATUS_DOMAIN = 3,
  FW_STATUS_RANGE = 4,
  FW_STATUS_RESOURCE = 5,
  FW_STATUS_IO = 6,
  FW_STATUS_CONFIG = 7,
  FW_STATUS_INVALID_UTF8 = 8,
  FW_STATUS_PANIC = 9,
} FwStatus;

/*
 Opaque measure handle.
 */
typedef struct FwMeasure FwMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *fw_last_error_message(void);

/*
 Cantor product of `depth` generations in `n` dimensions; `centered`
 nonzero selects the symmetric copy in [-1/2, 1/2]^n.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum FwStatus fw_measure_cantor(double ratio,
                                uintptr_t depth,
                                uintptr_t n,
                                int32_t centered,
                                struct FwMeasure **out);

/*
 Surface measure on the sphere of radius `radius` in R^n.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum FwStatus fw_measure_sphere(double radius,
                                uintptr_t n,
                                uintptr_t points,
                                struct FwMeasure **out);

/*
 Loads a measure from a JSON file in the exchange format.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum FwStatus fw_measure_from_json(const char *path, struct FwMeasure **out);

/*
 Releases a handle; null is ignored.

 # Safety
 `m` must come from this library and not be freed twice.
 */
void fw_measure_free(struct FwMeasure *m);

/*
 # Safety
 `m` must be a live handle and `out` writable.
 */
enum FwStatus fw_measure_len(const struct FwMeasure *m, uintptr_t *out);

/*
 # Safety
 `m` must be a live handle and `out` writable.
 */
enum FwStatus fw_measure_dim(const struct FwMeasure *m, uintptr_t *out);

/*
 # Safety
 `m` must be a live handle and `out` writable.
 */
enum FwStatus fw_measure_total_mass(const struct FwMeasure *m, double *out);

/*
 Growth constant sup mu(B(x, r)) / r^alpha over radii down to `floor`.

 # Safety
 `m` must be a live handle and `out` writable.
 */
enum FwStatus fw_frostman_constant(const struct FwMeasure *m,
                                   double alpha,
                                   double floor,
                                   double *out);

/*
 Fourier transform of an even measure at `count` frequencies (`dim`
 coordinates each, row-major in `xi`); writes `count` real values.

 # Safety
 `xi` must hold `count * dim` values and `out` room for `count`.
 */
enum FwStatus fw_measure_ft(const struct FwMeasure *m,
                            const double *xi,
                            uintptr_t count,
                            double *out);

/*
 Complex Fourier transform of any measure; writes `count` (re, im) pairs.

 # Safety
 `xi` must hold `count * dim` values and `out` room for `2 * count`.
 */
enum FwStatus fw_measure_ft_complex(const struct FwMeasure *m,
                                    const double *xi,
                                    uintptr_t count,
                                    double *out);

/*
 Spherical average of |mu^(R w)|^2 over unit directions w.

 # Safety
 `m` must be a live handle and `out` writable.
 */
enum FwStatus fw_sphere_decay(const struct FwMeasure *m,
                              double radius,
                              uintptr_t sphere_points,
                              double *out);

/*
 Lebesgue measure of the distance set thickened by `radius`.

 # Safety
 `m` must be a live handle and `out` writable.
 */
enum FwStatus fw_distance_set_measure(const struct FwMeasure *m, double radius, double *out);

/*
 Necessary Sobolev exponent for the fractal Strichartz estimate.

 # Safety
 `out` must be writable.
 */
enum FwStatus fw_s_necessary(double alpha, double p, uintptr_t n, double *out);

/*
 Best known lower bound for the averaged decay gain.

 # Safety
 `out` must be writable.
 */
enum FwStatus fw_gamma_lower_bound(double alpha, uintptr_t n, double *out);

/*
 Runs an experiment from a JSON config and returns its result record as a
 JSON string, to be released with [`fw_string_free`]. `passed` receives 1
 when every gate passes. Nothing is written to disk.

 # Safety
 `config_json` must be a NUL-terminated string; the out pointers writable.
 */
enum FwStatus fw_run_experiment(const char *config_json, char **result_json, int32_t *passed);

/*
 Releases a string returned by this library; null is ignored.

 # Safety
 `s` must come from this library and not be freed twice.
 */
void fw_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FWLAB_H */
