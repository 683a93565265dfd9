#ifndef MEMSQUENCH_H
#define MEMSQUENCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define MSQ_GEOMETRY_STRIP 0

#define MSQ_GEOMETRY_DISC 1

#define MSQ_BC_CLAMPED 0

#define MSQ_BC_NAVIER 1

#define MSQ_OUTCOME_TOUCHDOWN 0

#define MSQ_OUTCOME_STEADY_STATE 1

#define MSQ_OUTCOME_INCONCLUSIVE 2

#define MSQ_CASE_LINE 0

#define MSQ_CASE_RADIAL_ORIGIN 1

typedef enum MsqStatus {
  MSQ_STATUS_OK = 0,
  MSQ_STATUS_NULL_POINTER = 1,
  MSQ_STATUS_INVALID_ARGUMENT = 2,
  MSQ_STATUS_BUFFER_TOO_SMALL = 3,
  // The requested value does not exist for this result (e.g. `t_c` without touchdown).
  MSQ_STATUS_NOT_AVAILABLE = 4,
  MSQ_STATUS_NO_CONVERGENCE = 5,
  MSQ_STATUS_STIFFNESS_FAILURE = 6,
  MSQ_STATUS_SINGULAR = 7,
  MSQ_STATUS_OUT_OF_RANGE = 8,
  MSQ_STATUS_IO = 9,
  MSQ_STATUS_PANIC = 10,
  MSQ_STATUS_INTERNAL = 11,
} MsqStatus;

// Opaque similarity profile.
typedef struct MsqProfile MsqProfile;

// Opaque simulation configuration.
typedef struct MsqSimConfig MsqSimConfig;

// Opaque simulation result.
typedef struct MsqSimResult MsqSimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message (NUL-terminated, truncated
// to `cap`) and returns its full length in bytes without the terminator;
// 0 when there is none.
//
// # Safety
// `buf` must be null or valid for `cap` bytes.
size_t msq_last_error_message(char *buf, size_t cap);

// Library version as a static NUL-terminated string.
const char *msq_version(void);

// # Safety
// `mu0` must be valid for a write.
enum MsqStatus msq_principal_eigenvalue(uint32_t geometry, uint32_t condition, double *mu0);

double msq_epsilon_bar(double mu0);

// # Safety
// `out` must be valid for a write.
enum MsqStatus msq_touchdown_time_bound(double epsilon, double mu0, double *out);

// Asymptotic touchdown locations at `t_c`: two points on the strip, one
// radius on the disc.
//
// # Safety
// See the module conventions for `(buf, cap, len)`.
enum MsqStatus msq_predict_touchdown(uint32_t geometry,
                                     uint32_t condition,
                                     double epsilon,
                                     double t_c,
                                     double *buf,
                                     size_t cap,
                                     size_t *len);

// New configuration with default tolerances.
//
// # Safety
// `out` must be valid for a write.
enum MsqStatus msq_config_new(uint32_t geometry,
                              uint32_t condition,
                              double epsilon,
                              size_t n_intervals,
                              struct MsqSimConfig **out);

// # Safety
// `cfg` must come from `msq_config_new` and not be freed yet (null is ignored).
void msq_config_free(struct MsqSimConfig *cfg);

// # Safety
// `cfg` must be a live handle.
enum MsqStatus msq_config_set_threshold(struct MsqSimConfig *cfg, double threshold);

// # Safety
// `cfg` must be a live handle.
enum MsqStatus msq_config_set_gamma(struct MsqSimConfig *cfg, double gamma);

// # Safety
// `cfg` must be a live handle.
enum MsqStatus msq_config_set_tolerances(struct MsqSimConfig *cfg, double rtol, double atol);

// Replaces the snapshot times with `times[0..len]`.
//
// # Safety
// `cfg` must be a live handle; `times` valid for `len` reads.
enum MsqStatus msq_config_set_snapshot_times(struct MsqSimConfig *cfg,
                                             const double *times,
                                             size_t len);

// Runs the simulation until it stops; query the outcome for the reason.
//
// # Safety
// `cfg` must be a live handle; `out` valid for a write.
enum MsqStatus msq_simulate(const struct MsqSimConfig *cfg, struct MsqSimResult **out);

// # Safety
// `res` must come from `msq_simulate` and not be freed yet (null is ignored).
void msq_result_free(struct MsqSimResult *res);

// # Safety
// `res` must be a live handle; `out` valid for a write.
enum MsqStatus msq_result_outcome(const struct MsqSimResult *res, uint32_t *out);

// Extrapolated touchdown time; `MSQ_STATUS_NOT_AVAILABLE` without touchdown.
//
// # Safety
// `res` must be a live handle; `out` valid for a write.
enum MsqStatus msq_result_t_c(const struct MsqSimResult *res, double *out);

// # Safety
// `res` must be a live handle; see the module conventions for `(buf, cap, len)`.
enum MsqStatus msq_result_touchdown_points(const struct MsqSimResult *res,
                                           double *buf,
                                           size_t cap,
                                           size_t *len);

// Number of snapshots: requested times first, then the final state.
//
// # Safety
// `res` must be a live handle; `out` valid for a write.
enum MsqStatus msq_result_snapshot_count(const struct MsqSimResult *res, size_t *out);

// Time of snapshot `index` with its mesh nodes and nodal `u`. `nodes` and `u` are
// both `(buf, cap)` pairs sharing the length written to `len`.
//
// # Safety
// `res` must be a live handle; buffers valid for `cap` writes; `t`, `len` valid.
enum MsqStatus msq_result_snapshot(const struct MsqSimResult *res,
                                   size_t index,
                                   double *t,
                                   double *nodes,
                                   double *u,
                                   size_t cap,
                                   size_t *len);

// Similarity profile by Newton from the amplitude `c0_init` on `n` intervals.
//
// # Safety
// `out` must be valid for a write.
enum MsqStatus msq_profile_solve(uint32_t case_,
                                 double c0_init,
                                 double length,
                                 size_t n,
                                 struct MsqProfile **out);

// # Safety
// `p` must come from `msq_profile_solve` and not be freed yet (null is ignored).
void msq_profile_free(struct MsqProfile *p);

// Far-field amplitude `c0`.
//
// # Safety
// `p` must be a live handle; `out` valid for a write.
enum MsqStatus msq_profile_c0(const struct MsqProfile *p, double *out);

// Profile value at `eta`; `MSQ_STATUS_OUT_OF_RANGE` outside the grid.
//
// # Safety
// `p` must be a live handle; `out` valid for a write.
enum MsqStatus msq_profile_eval(const struct MsqProfile *p, double eta, double *out);

// Leading `n_eigs` eigenvalues of the linearisation, largest first.
//
// # Safety
// `p` must be a live handle; see the module conventions for `(buf, cap, len)`.
enum MsqStatus msq_profile_eigenvalues(const struct MsqProfile *p,
                                       size_t n_eigs,
                                       double *buf,
                                       size_t cap,
                                       size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEMSQUENCH_H */
