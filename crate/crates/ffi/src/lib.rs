//! C ABI over `pmelab`.
//!
//! Meshes and trajectories are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns a
//! [`PmeStatus`]; on failure, [`pme_last_error`] describes the error for the
//! calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use pmelab::analysis::{self, EnvelopeParams, T0Mode};
use pmelab::config::parse_config;
use pmelab::evolve::{self, Normalization, Scheme, SolverConfig, Trajectory};
use pmelab::mesh::{build_mesh, DensityField, Potential, WeightedMesh};
use pmelab::operators::BoundaryCondition;
use pmelab::scenario::run_scenario;
use pmelab::spectral::estimate_poincare;
use pmelab::Error;

/// Result codes of the C interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    /// Explicit-step instability or Newton failure during a run.
    SolverFailure = 4,
    /// Eigenvalue iteration did not converge.
    ConvergenceFailure = 5,
    ConfigError = 6,
    IoError = 7,
    /// A Rust panic was caught at the boundary.
    InternalError = 8,
}

/// Opaque mesh handle.
pub struct PmeMesh(WeightedMesh);

/// Opaque trajectory handle.
pub struct PmeTrajectory(Trajectory);

/// Solver options; start from [`pme_solver_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PmeSolverOptions {
    pub beta: f64,
    /// 0: `c_eq = 1`; 1: `c_eq = 1/(1+beta)`.
    pub normalization: c_int,
    /// 0: explicit Euler; 1: implicit Euler.
    pub scheme: c_int,
    pub cfl_safety: f64,
    pub dt_max: f64,
    pub newton_tol: f64,
    pub newton_max_iter: u32,
    /// 0: zero flux; 1: Dirichlet with `boundary_value`.
    pub dirichlet: c_int,
    pub boundary_value: f64,
}

/// Per-snapshot functionals.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PmeDiagnostics {
    pub time: f64,
    pub mass: f64,
    pub lp_integral: f64,
    pub kp: f64,
    pub dp: f64,
    pub energy: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PmeStatus {
    match err.root() {
        Error::Parameter { .. }
        | Error::NonFinitePotential { .. }
        | Error::DegenerateWeight { .. }
        | Error::NegativeDensity { .. }
        | Error::NonFiniteDensity { .. }
        | Error::ZeroField
        | Error::BarrierPrecondition { .. }
        | Error::Index { .. } => PmeStatus::InvalidArgument,
        Error::Shape { .. } => PmeStatus::ShapeMismatch,
        Error::Stability { .. } | Error::Newton { .. } => PmeStatus::SolverFailure,
        Error::Eigen { .. } => PmeStatus::ConvergenceFailure,
        Error::Config { .. } => PmeStatus::ConfigError,
        Error::Io(_) => PmeStatus::IoError,
        Error::Integration { .. } => PmeStatus::SolverFailure,
    }
}

struct Failure(PmeStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PmeStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(reason: impl Into<String>) -> Failure {
    Failure(PmeStatus::InvalidArgument, reason.into())
}

/// Runs `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PmeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PmeStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {message}"));
            PmeStatus::InternalError
        }
    }
}

unsafe fn slice<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn slice_mut<'a>(data: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(data, len))
}

unsafe fn string<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid(format!("`{what}` is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn solver_config(opts: &PmeSolverOptions) -> Result<SolverConfig, Failure> {
    let mut cfg = SolverConfig::new(opts.beta);
    cfg.normalization = match opts.normalization {
        0 => Normalization::Unit,
        1 => Normalization::InverseOnePlusBeta,
        n => return Err(invalid(format!("normalization must be 0 or 1, got {n}"))),
    };
    cfg.scheme = match opts.scheme {
        0 => Scheme::ExplicitEuler,
        1 => Scheme::ImplicitEuler,
        s => return Err(invalid(format!("scheme must be 0 or 1, got {s}"))),
    };
    cfg.cfl_safety = opts.cfl_safety;
    cfg.dt_max = opts.dt_max;
    cfg.newton_tol = opts.newton_tol;
    cfg.newton_max_iter = opts.newton_max_iter as usize;
    cfg.bc = match opts.dirichlet {
        0 => BoundaryCondition::ZeroFlux,
        1 => BoundaryCondition::Dirichlet(opts.boundary_value),
        d => return Err(invalid(format!("dirichlet must be 0 or 1, got {d}"))),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pme_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn pme_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Defaults: `c_eq = 1/(1+beta)`, explicit Euler, safety 0.2, zero flux.
#[no_mangle]
pub extern "C" fn pme_solver_options_default(beta: f64) -> PmeSolverOptions {
    let cfg = SolverConfig::new(beta);
    PmeSolverOptions {
        beta,
        normalization: 1,
        scheme: 0,
        cfl_safety: cfg.cfl_safety,
        dt_max: cfg.dt_max,
        newton_tol: cfg.newton_tol,
        newton_max_iter: cfg.newton_max_iter as u32,
        dirichlet: 0,
        boundary_value: 0.0,
    }
}

/// Builds the mesh of `[-half_width, half_width]` with `n_cells` cells.
/// `potential` is one of `gaussian`, `flat`, `smoothed_power`, `double_well`.
///
/// # Safety
/// `potential` must be a nul-terminated string, `params` must point to
/// `n_params` doubles (or be null when `n_params == 0`), `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pme_mesh_new(
    potential: *const c_char,
    params: *const f64,
    n_params: usize,
    half_width: f64,
    n_cells: usize,
    out: *mut *mut PmeMesh,
) -> PmeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = string(potential, "potential")?;
        let params = slice(params, n_params, "params")?;
        let mesh = build_mesh(Potential::from_spec(name, params)?, half_width, n_cells)?;
        out.write(Box::into_raw(Box::new(PmeMesh(mesh))));
        Ok(())
    })
}

/// Releases a mesh. Null is ignored.
///
/// # Safety
/// `mesh` must come from [`pme_mesh_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pme_mesh_free(mesh: *mut PmeMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Number of cells (0 for a null handle).
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pme_mesh_cells(mesh: *const PmeMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.n_cells())
}

/// Copies cell centres and normalized cell weights (`len` must equal the cell count).
/// Either output may be null to skip it.
///
/// # Safety
/// `mesh` must be a live handle; non-null outputs must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pme_mesh_geometry(
    mesh: *const PmeMesh,
    centers: *mut f64,
    weights: *mut f64,
    len: usize,
) -> PmeStatus {
    guard(|| {
        let mesh = &mesh.as_ref().ok_or_else(|| null("mesh"))?.0;
        if len != mesh.n_cells() {
            return Err(Error::Shape {
                expected: mesh.n_cells(),
                actual: len,
            }
            .into());
        }
        if !centers.is_null() {
            slice_mut(centers, len, "centers")?.copy_from_slice(&mesh.centers);
        }
        if !weights.is_null() {
            slice_mut(weights, len, "weights")?.copy_from_slice(&mesh.cell_weights);
        }
        Ok(())
    })
}

/// Discrete Poincaré constant (spectral gap of `-L_h`) of the mesh.
///
/// # Safety
/// `mesh` must be a live handle and `lambda` writable.
#[no_mangle]
pub unsafe extern "C" fn pme_poincare(mesh: *const PmeMesh, lambda: *mut f64) -> PmeStatus {
    guard(|| {
        let mesh = &mesh.as_ref().ok_or_else(|| null("mesh"))?.0;
        let r = estimate_poincare(mesh)?;
        write_out(lambda, r.lambda, "lambda")
    })
}

/// Integrates from `initial` (one value per cell) to `horizon`, recording
/// `t = 0` and every entry of `times` (strictly increasing, within the horizon).
/// Diagnostics use exponent `p`.
///
/// # Safety
/// `mesh` must be a live handle, `options` readable, `initial` must hold `len`
/// doubles, `times` `n_times` doubles (or null when zero), `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pme_run(
    mesh: *const PmeMesh,
    options: *const PmeSolverOptions,
    initial: *const f64,
    len: usize,
    horizon: f64,
    times: *const f64,
    n_times: usize,
    p: f64,
    out: *mut *mut PmeTrajectory,
) -> PmeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mesh = &mesh.as_ref().ok_or_else(|| null("mesh"))?.0;
        let cfg = solver_config(options.as_ref().ok_or_else(|| null("options"))?)?;
        let values = slice(initial, len, "initial")?.to_vec();
        mesh.check_field(&values)?;
        let field = DensityField::new(values, 0.0)?;
        let times = slice(times, n_times, "times")?;
        let traj = evolve::run(&field, mesh, &cfg, horizon, times, p)?;
        out.write(Box::into_raw(Box::new(PmeTrajectory(traj))));
        Ok(())
    })
}

/// Releases a trajectory. Null is ignored.
///
/// # Safety
/// `traj` must come from [`pme_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pme_trajectory_free(traj: *mut PmeTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of recorded snapshots (0 for a null handle).
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pme_trajectory_len(traj: *const PmeTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Copies snapshot `index` into `values` (`len` = cell count) and its time into `time`.
///
/// # Safety
/// `traj` must be a live handle, `values` must hold `len` doubles, `time` writable or null.
#[no_mangle]
pub unsafe extern "C" fn pme_trajectory_snapshot(
    traj: *const PmeTrajectory,
    index: usize,
    time: *mut f64,
    values: *mut f64,
    len: usize,
) -> PmeStatus {
    guard(|| {
        let traj = &traj.as_ref().ok_or_else(|| null("traj"))?.0;
        let snap = traj.snapshots.get(index).ok_or_else(|| {
            Failure::from(Error::Index {
                index,
                max: traj.len().saturating_sub(1),
            })
        })?;
        if len != snap.field.len() {
            return Err(Error::Shape {
                expected: snap.field.len(),
                actual: len,
            }
            .into());
        }
        slice_mut(values, len, "values")?.copy_from_slice(&snap.field.values);
        if !time.is_null() {
            time.write(snap.t());
        }
        Ok(())
    })
}

/// Diagnostics of snapshot `index`.
///
/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pme_trajectory_diagnostics(
    traj: *const PmeTrajectory,
    index: usize,
    out: *mut PmeDiagnostics,
) -> PmeStatus {
    guard(|| {
        let traj = &traj.as_ref().ok_or_else(|| null("traj"))?.0;
        let snap = traj.snapshots.get(index).ok_or_else(|| {
            Failure::from(Error::Index {
                index,
                max: traj.len().saturating_sub(1),
            })
        })?;
        let d = snap.diagnostics;
        write_out(
            out,
            PmeDiagnostics {
                time: snap.t(),
                mass: d.mass,
                lp_integral: d.lp_integral,
                kp: d.kp,
                dp: d.dp,
                energy: d.energy,
            },
            "out",
        )
    })
}

/// First time `D_p` reaches `(p-1)/p`, linearly interpolated; writes `-1` if never.
///
/// # Safety
/// `traj` must be a live handle and `t0` writable.
#[no_mangle]
pub unsafe extern "C" fn pme_trajectory_t0(traj: *const PmeTrajectory, t0: *mut f64) -> PmeStatus {
    guard(|| {
        let traj = &traj.as_ref().ok_or_else(|| null("traj"))?.0;
        let value = analysis::detect_t0(traj, traj.initial_mass).unwrap_or(-1.0);
        write_out(t0, value, "t0")
    })
}

/// Two-phase decay envelope for `D_p` at time `t > 0`.
///
/// With `t0 < 0` the phase boundary is the envelope's own crossing of
/// `(p-1)/p`; otherwise `t0` and `dp_at_t0` are used. `dp0` may be `INFINITY`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pme_decay_envelope(
    lambda: f64,
    beta: f64,
    p: f64,
    mass: f64,
    dp0: f64,
    t: f64,
    t0: f64,
    dp_at_t0: f64,
    out: *mut f64,
) -> PmeStatus {
    guard(|| {
        let params = EnvelopeParams::new(lambda, beta, p, mass, dp0)?;
        let mode = if t0 < 0.0 {
            T0Mode::FromEnvelope
        } else {
            T0Mode::FromTrajectory { t0, dp_at_t0 }
        };
        write_out(out, analysis::decay_envelope(&params, t, mode)?, "out")
    })
}

/// Data-independent bound on `K_p` for unit-mass data.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pme_unconditional_kp_bound(lambda: f64, beta: f64, p: f64, t: f64, out: *mut f64) -> PmeStatus {
    guard(|| write_out(out, analysis::unconditional_kp_bound(lambda, beta, p, t)?, "out"))
}

/// Runs a TOML scenario document and writes `trajectory.csv` and
/// `summary.csv` into `out_dir`. `passed` receives 1 when every check passed.
///
/// # Safety
/// `config_toml` and `out_dir` must be nul-terminated strings; `passed` writable or null.
#[no_mangle]
pub unsafe extern "C" fn pme_run_scenario(config_toml: *const c_char, out_dir: *const c_char, passed: *mut c_int) -> PmeStatus {
    guard(|| {
        let cfg = parse_config(string(config_toml, "config_toml")?)?;
        let dir = string(out_dir, "out_dir")?;
        let outcome = run_scenario(&cfg)?;
        outcome.write(Path::new(dir))?;
        if !passed.is_null() {
            passed.write(c_int::from(outcome.passed()));
        }
        Ok(())
    })
}
