#ifndef THZMIX_H
#define THZMIX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum ThzStatus {
  THZ_STATUS_OK = 0,
  THZ_STATUS_NULL_POINTER = 1,
  THZ_STATUS_INVALID_ARGUMENT = 2,
  THZ_STATUS_CONFIG_ERROR = 3,
  THZ_STATUS_PHYSICS_ERROR = 4,
  THZ_STATUS_SOLVER_ERROR = 5,
  THZ_STATUS_IO_ERROR = 6,
  THZ_STATUS_OUT_OF_RANGE = 7,
  THZ_STATUS_PANIC = 99,
} ThzStatus;

// Propagation modes accepted by [`thz_scenario_run`].
typedef enum ThzMode {
  THZ_MODE_FULL = 0,
  THZ_MODE_REDUCED = 1,
  THZ_MODE_ANALYTIC = 2,
} ThzMode;

// Opaque scenario handle.
typedef struct ThzScenario ThzScenario;

// Opaque trajectory handle.
typedef struct ThzTrajectory ThzTrajectory;

// Steady-state populations and loop-phase referenced coherences.
typedef struct ThzDensityMatrix {
  double rho11;
  double rho22;
  double rho33;
  double sigma31_re;
  double sigma31_im;
  double sigma32_re;
  double sigma32_im;
  double sigma21_re;
  double sigma21_im;
} ThzDensityMatrix;

// One trajectory row; intensities in W/cm².
typedef struct ThzSample {
  double tau;
  double z_cm;
  double zeta;
  double i31_w_cm2;
  double i32_w_cm2;
  double it_w_cm2;
  double u1sq;
  double u2sq;
  double utsq;
  double phi_rad;
  double rho33;
  double inv_s;
  double inv_b;
  double inv_c;
  double inv_pi;
} ThzSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Description of the last error on this thread; empty after a success.
// The pointer stays valid until the next call into this library on the
// same thread.
const char *thz_last_error(void);

// Library version as a static NUL-terminated string.
const char *thz_version(void);

// Create a scenario from a built-in preset name.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum ThzStatus thz_scenario_from_preset(const char *name, struct ThzScenario **out);

// Create a scenario from config text.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum ThzStatus thz_scenario_from_toml(const char *text, struct ThzScenario **out);

// Create a scenario from a config file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum ThzStatus thz_scenario_load(const char *path, struct ThzScenario **out);

// Release a scenario. Null is ignored.
//
// # Safety
// `scenario` must come from this library and not be used afterwards.
void thz_scenario_free(struct ThzScenario *scenario);

// Energy conversion bound ωT/ω31 of the scenario's medium.
//
// # Safety
// Both pointers must be valid.
enum ThzStatus thz_scenario_efficiency_bound(const struct ThzScenario *scenario, double *out);

// Optical-pumping threshold intensity (W/cm²).
//
// # Safety
// Both pointers must be valid.
enum ThzStatus thz_scenario_pumping_threshold(const struct ThzScenario *scenario, double *out);

// Steady state of atoms with axial velocity `vz_cm_s` driven at exact
// resonance by Rabi frequencies (units of γ31) with loop phase `phi`.
//
// # Safety
// Both pointers must be valid.
enum ThzStatus thz_scenario_steady_state(const struct ThzScenario *scenario,
                                         double g31,
                                         double g32,
                                         double gt,
                                         double phi,
                                         double vz_cm_s,
                                         struct ThzDensityMatrix *out);

// Propagate a scenario.
//
// # Safety
// `scenario` and `out` must be valid pointers.
enum ThzStatus thz_scenario_run(const struct ThzScenario *scenario,
                                enum ThzMode mode,
                                struct ThzTrajectory **out);

// Number of samples; 0 for a null handle.
//
// # Safety
// `trajectory` must be null or valid.
size_t thz_trajectory_len(const struct ThzTrajectory *trajectory);

// Copy sample `index` into `out`.
//
// # Safety
// Both pointers must be valid.
enum ThzStatus thz_trajectory_sample(const struct ThzTrajectory *trajectory,
                                     size_t index,
                                     struct ThzSample *out);

// Release a trajectory. Null is ignored.
//
// # Safety
// `trajectory` must come from this library and not be used afterwards.
void thz_trajectory_free(struct ThzTrajectory *trajectory);

// Complete elliptic integral K(k), 0 ≤ k < 1.
//
// # Safety
// `out` must be valid.
enum ThzStatus thz_complete_k(double k, double *out);

// Jacobi sn, cn, dn at `x` for 0 ≤ k ≤ 1.
//
// # Safety
// The output pointers must be valid.
enum ThzStatus thz_jacobi(double x, double k, double *sn, double *cn, double *dn);

// Closed-form generation solution (u1², u2², uT²) at `zeta`.
//
// # Safety
// The output pointers must be valid.
enum ThzStatus thz_analytic_solution(double zeta,
                                     double u10,
                                     double *u1sq,
                                     double *u2sq,
                                     double *utsq);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* THZMIX_H */
