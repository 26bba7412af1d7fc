#ifndef ECM_H
#define ECM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EcmStatus {
  ECM_STATUS_OK = 0,
  /**
   * Unreadable, unparsable or invalid input file.
   */
  ECM_STATUS_INPUT_ERROR = 1,
  /**
   * A micro-op has no resource to issue on.
   */
  ECM_STATUS_INFEASIBLE = 2,
  ECM_STATUS_NULL_POINTER = 3,
  ECM_STATUS_INVALID_ARGUMENT = 4,
  /**
   * Interior NUL or invalid UTF-8 in a string argument.
   */
  ECM_STATUS_INVALID_STRING = 5,
  ECM_STATUS_PANIC = 6,
} EcmStatus;

typedef struct EcmAnalysis EcmAnalysis;

typedef struct EcmKernel EcmKernel;

typedef struct EcmMachine EcmMachine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call into this library from the same thread.
 */
const char *ecm_last_error(void);

/**
 * Load a machine from a file path or a bundled name.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum EcmStatus ecm_machine_load(const char *name, struct EcmMachine **out);

/**
 * # Safety
 * `m` must come from [`ecm_machine_load`] and not be freed twice. Null is ignored.
 */
void ecm_machine_free(struct EcmMachine *m);

/**
 * Memory transfer cycles per cache line at `bandwidth_gbs`.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum EcmStatus ecm_machine_mem_cycles_per_cl(const struct EcmMachine *m,
                                             double bandwidth_gbs,
                                             double *out);

/**
 * Load a kernel from a file path or a bundled name.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum EcmStatus ecm_kernel_load(const char *name, struct EcmKernel **out);

/**
 * # Safety
 * `k` must come from [`ecm_kernel_load`] and not be freed twice. Null is ignored.
 */
void ecm_kernel_free(struct EcmKernel *k);

/**
 * Single-core prediction. A `bandwidth_gbs` of zero or less selects the
 * kernel's sustained bandwidth, or the machine default when it has none.
 *
 * # Safety
 * `m` and `k` must be live handles; `out` must be writable.
 */
enum EcmStatus ecm_analyze(const struct EcmMachine *m,
                           const struct EcmKernel *k,
                           double bandwidth_gbs,
                           bool penalty,
                           struct EcmAnalysis **out);

/**
 * # Safety
 * `a` must come from [`ecm_analyze`] and not be freed twice. Null is ignored.
 */
void ecm_analysis_free(struct EcmAnalysis *a);

/**
 * Number of predicted levels (L1 through memory); 0 for a null handle.
 *
 * # Safety
 * `a` must be a live handle or null.
 */
size_t ecm_analysis_level_count(const struct EcmAnalysis *a);

/**
 * Predicted cycles per cache line at level `index` (0 is L1).
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
enum EcmStatus ecm_analysis_level_cycles(const struct EcmAnalysis *a, size_t index, double *out);

/**
 * Name of level `index` (`L1`, `L2`, ..., `Mem`). Free with [`ecm_string_free`].
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
enum EcmStatus ecm_analysis_level_name(const struct EcmAnalysis *a, size_t index, char **out);

/**
 * In-core cycles: overlapping and non-overlapping.
 *
 * # Safety
 * `a` must be a live handle; both outputs must be writable.
 */
enum EcmStatus ecm_analysis_core_cycles(const struct EcmAnalysis *a, double *t_ol, double *t_nol);

/**
 * Model input in shorthand, e.g. `{1 || 2 | 2 | 4 | 9.1} cy/CL`.
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
enum EcmStatus ecm_analysis_input_string(const struct EcmAnalysis *a, bool unicode, char **out);

/**
 * Prediction in shorthand, e.g. `{2 ] 4 ] 8 ] 17.1} cy/CL`.
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
enum EcmStatus ecm_analysis_prediction_string(const struct EcmAnalysis *a,
                                              bool unicode,
                                              char **out);

/**
 * Predict from raw inputs without machine or kernel files. `t_data` holds
 * `n_data` transfer terms, innermost link first; `out` receives `n_data + 1`
 * level cycles and must have room for them.
 *
 * # Safety
 * `t_data` must point to `n_data` doubles (or be null when `n_data` is 0);
 * `out` must point to `n_data + 1` writable doubles.
 */
enum EcmStatus ecm_predict(double t_ol,
                           double t_nol,
                           const double *t_data,
                           size_t n_data,
                           double *out);

/**
 * Cycles to move `bytes` at `bandwidth_gbs` on a core clocked at `clock_ghz`.
 * Returns NaN for non-positive bandwidth or clock.
 */
double ecm_gbs_to_cycles(double bytes, double clock_ghz, double bandwidth_gbs);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. Null is ignored.
 */
void ecm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ECM_H */
