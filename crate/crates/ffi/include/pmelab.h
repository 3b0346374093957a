#ifndef PMELAB_H
#define PMELAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of the C interface.
typedef enum PmeStatus {
  PME_STATUS_OK = 0,
  PME_STATUS_NULL_POINTER = 1,
  PME_STATUS_INVALID_ARGUMENT = 2,
  PME_STATUS_SHAPE_MISMATCH = 3,
  // Explicit-step instability or Newton failure during a run.
  PME_STATUS_SOLVER_FAILURE = 4,
  // Eigenvalue iteration did not converge.
  PME_STATUS_CONVERGENCE_FAILURE = 5,
  PME_STATUS_CONFIG_ERROR = 6,
  PME_STATUS_IO_ERROR = 7,
  // A Rust panic was caught at the boundary.
  PME_STATUS_INTERNAL_ERROR = 8,
} PmeStatus;

// Opaque mesh handle.
typedef struct PmeMesh PmeMesh;

// Opaque trajectory handle.
typedef struct PmeTrajectory PmeTrajectory;

// Solver options; start from [`pme_solver_options_default`].
typedef struct PmeSolverOptions {
  double beta;
  // 0: `c_eq = 1`; 1: `c_eq = 1/(1+beta)`.
  int normalization;
  // 0: explicit Euler; 1: implicit Euler.
  int scheme;
  double cfl_safety;
  double dt_max;
  double newton_tol;
  uint32_t newton_max_iter;
  // 0: zero flux; 1: Dirichlet with `boundary_value`.
  int dirichlet;
  double boundary_value;
} PmeSolverOptions;

// Per-snapshot functionals.
typedef struct PmeDiagnostics {
  double time;
  double mass;
  double lp_integral;
  double kp;
  double dp;
  double energy;
} PmeDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a success.
// The pointer stays valid until the next call into this library on the same thread.
const char *pme_last_error(void);

// Library version as a static nul-terminated string.
const char *pme_version(void);

// Defaults: `c_eq = 1/(1+beta)`, explicit Euler, safety 0.2, zero flux.
struct PmeSolverOptions pme_solver_options_default(double beta);

// Builds the mesh of `[-half_width, half_width]` with `n_cells` cells.
// `potential` is one of `gaussian`, `flat`, `smoothed_power`, `double_well`.
//
// # Safety
// `potential` must be a nul-terminated string, `params` must point to
// `n_params` doubles (or be null when `n_params == 0`), `out` must be writable.
enum PmeStatus pme_mesh_new(const char *potential,
                            const double *params,
                            size_t n_params,
                            double half_width,
                            size_t n_cells,
                            struct PmeMesh **out);

// Releases a mesh. Null is ignored.
//
// # Safety
// `mesh` must come from [`pme_mesh_new`] and not be used afterwards.
void pme_mesh_free(struct PmeMesh *mesh);

// Number of cells (0 for a null handle).
//
// # Safety
// `mesh` must be null or a live handle.
size_t pme_mesh_cells(const struct PmeMesh *mesh);

// Copies cell centres and normalized cell weights (`len` must equal the cell count).
// Either output may be null to skip it.
//
// # Safety
// `mesh` must be a live handle; non-null outputs must hold `len` doubles.
enum PmeStatus pme_mesh_geometry(const struct PmeMesh *mesh,
                                 double *centers,
                                 double *weights,
                                 size_t len);

// Discrete Poincaré constant (spectral gap of `-L_h`) of the mesh.
//
// # Safety
// `mesh` must be a live handle and `lambda` writable.
enum PmeStatus pme_poincare(const struct PmeMesh *mesh, double *lambda);

// Integrates from `initial` (one value per cell) to `horizon`, recording
// `t = 0` and every entry of `times` (strictly increasing, within the horizon).
// Diagnostics use exponent `p`.
//
// # Safety
// `mesh` must be a live handle, `options` readable, `initial` must hold `len`
// doubles, `times` `n_times` doubles (or null when zero), `out` writable.
enum PmeStatus pme_run(const struct PmeMesh *mesh,
                       const struct PmeSolverOptions *options,
                       const double *initial,
                       size_t len,
                       double horizon,
                       const double *times,
                       size_t n_times,
                       double p,
                       struct PmeTrajectory **out);

// Releases a trajectory. Null is ignored.
//
// # Safety
// `traj` must come from [`pme_run`] and not be used afterwards.
void pme_trajectory_free(struct PmeTrajectory *traj);

// Number of recorded snapshots (0 for a null handle).
//
// # Safety
// `traj` must be null or a live handle.
size_t pme_trajectory_len(const struct PmeTrajectory *traj);

// Copies snapshot `index` into `values` (`len` = cell count) and its time into `time`.
//
// # Safety
// `traj` must be a live handle, `values` must hold `len` doubles, `time` writable or null.
enum PmeStatus pme_trajectory_snapshot(const struct PmeTrajectory *traj,
                                       size_t index,
                                       double *time,
                                       double *values,
                                       size_t len);

// Diagnostics of snapshot `index`.
//
// # Safety
// `traj` must be a live handle and `out` writable.
enum PmeStatus pme_trajectory_diagnostics(const struct PmeTrajectory *traj,
                                          size_t index,
                                          struct PmeDiagnostics *out);

// First time `D_p` reaches `(p-1)/p`, linearly interpolated; writes `-1` if never.
//
// # Safety
// `traj` must be a live handle and `t0` writable.
enum PmeStatus pme_trajectory_t0(const struct PmeTrajectory *traj, double *t0);

// Two-phase decay envelope for `D_p` at time `t > 0`.
//
// With `t0 < 0` the phase boundary is the envelope's own crossing of
// `(p-1)/p`; otherwise `t0` and `dp_at_t0` are used. `dp0` may be `INFINITY`.
//
// # Safety
// `out` must be writable.
enum PmeStatus pme_decay_envelope(double lambda,
                                  double beta,
                                  double p,
                                  double mass,
                                  double dp0,
                                  double t,
                                  double t0,
                                  double dp_at_t0,
                                  double *out);

// Data-independent bound on `K_p` for unit-mass data.
//
// # Safety
// `out` must be writable.
enum PmeStatus pme_unconditional_kp_bound(double lambda,
                                          double beta,
                                          double p,
                                          double t,
                                          double *out);

// Runs a TOML scenario document and writes `trajectory.csv` and
// `summary.csv` into `out_dir`. `passed` receives 1 when every check passed.
//
// # Safety
// `config_toml` and `out_dir` must be nul-terminated strings; `passed` writable or null.
enum PmeStatus pme_run_scenario(const char *config_toml, const char *out_dir, int *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PMELAB_H */
