//! Time integration of `d/dt mu = c_eq * L0 Psi(mu)`.
//!
//! The explicit scheme is monotone under [`stable_dt`], so discrete comparison
//! and L1 contraction hold structurally; it is the reference scheme. The
//! implicit scheme (backward Euler + Newton on the tridiagonal Jacobian) is for
//! stiff runs.

use crate::error::{Error, Result};
use crate::mesh::{validate_density, DensityField, WeightedMesh};
use crate::operators::{self, apply_l_into, BoundaryCondition, Power};
use crate::tridiag;

/// Which time normalization the evolution uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `c_eq = 1`: `d/dt mu = L0 mu^{1+beta}`.
    Unit,
    /// `c_eq = 1/(1+beta)`, the normalization of the smoothing estimate.
    InverseOnePlusBeta,
}

impl Normalization {
    pub fn coefficient(self, beta: f64) -> f64 {
        match self {
            Normalization::Unit => 1.0,
            Normalization::InverseOnePlusBeta => 1.0 / (1.0 + beta),
        }
    }

    /// Factor `k` with `t_unit = t / k`, i.e. the time of the `c_eq = 1` flow
    /// reached at time `t` of this one is `t * c_eq`.
    pub fn unit_time(self, t: f64, beta: f64) -> f64 {
        t * self.coefficient(beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitEuler,
    ImplicitEuler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub beta: f64,
    pub normalization: Normalization,
    pub scheme: Scheme,
    /// Fraction of the explicit stability limit. Values above 1 are accepted
    /// so instability can be provoked on purpose.
    pub cfl_safety: f64,
    pub dt_max: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub bc: BoundaryCondition,
}

impl SolverConfig {
    pub fn new(beta: f64) -> Self {
        SolverConfig {
            beta,
            normalization: Normalization::InverseOnePlusBeta,
            scheme: Scheme::ExplicitEuler,
            cfl_safety: 0.2,
            dt_max: 1e-2,
            newton_tol: 1e-11,
            newton_max_iter: 50,
            bc: BoundaryCondition::ZeroFlux,
        }
    }

    pub fn with_normalization(mut self, n: Normalization) -> Self {
        self.normalization = n;
        self
    }

    pub fn with_scheme(mut self, s: Scheme) -> Self {
        self.scheme = s;
        self
    }

    pub fn with_bc(mut self, bc: BoundaryCondition) -> Self {
        self.bc = bc;
        self
    }

    pub fn c_eq(&self) -> f64 {
        self.normalization.coefficient(self.beta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::param("beta", "must be positive"));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety.is_finite()) {
            return Err(Error::param("cfl_safety", "must be positive"));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(Error::param("dt_max", "must be positive"));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::param("newton_tol", "must be positive"));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::param("newton_max_iter", "must be at least 1"));
        }
        self.bc.validate()
    }
}

/// Largest explicit step keeping the scheme monotone (times `cfl_safety`).
pub fn stable_dt(field: &DensityField, mesh: &WeightedMesh, cfg: &SolverConfig) -> f64 {
    let mut peak = field.max();
    if let BoundaryCondition::Dirichlet(g) = cfg.bc {
        peak = peak.max(g);
    }
    stable_dt_for_peak(peak, mesh.h, mesh.max_weight_ratio(), cfg)
}

fn stable_dt_for_peak(peak: f64, h: f64, w_max: f64, cfg: &SolverConfig) -> f64 {
    if peak <= 0.0 {
        return cfg.dt_max;
    }
    let diffusivity = cfg.c_eq() * (1.0 + cfg.beta) * peak.powf(cfg.beta);
    let dt = cfg.cfl_safety * h * h / (2.0 * diffusivity * w_max);
    dt.min(cfg.dt_max)
}

/// Rounding noise below this is clamped to zero; anything more negative is an instability.
pub const NEGATIVE_CLAMP: f64 = 1e-13;

/// Reusable buffers for repeated steps on one mesh.
struct Stepper<'a> {
    mesh: &'a WeightedMesh,
    cfg: SolverConfig,
    c_eq: f64,
    power: Power,
    psi_bc: BoundaryCondition,
    w_max: f64,
    psi: Vec<f64>,
    lpsi: Vec<f64>,
    // Newton workspace
    stencil: Option<operators::Stencil>,
    jl: Vec<f64>,
    jd: Vec<f64>,
    ju: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(mesh: &'a WeightedMesh, cfg: &SolverConfig) -> Self {
        let n = mesh.n_cells();
        let power = Power::new(1.0 + cfg.beta);
        Stepper {
            mesh,
            cfg: *cfg,
            c_eq: cfg.c_eq(),
            power,
            psi_bc: cfg.bc.mapped(|g| power.eval(g)),
            w_max: mesh.max_weight_ratio(),
            psi: vec![0.0; n],
            lpsi: vec![0.0; n],
            stencil: None,
            jl: Vec::new(),
            jd: Vec::new(),
            ju: Vec::new(),
            scratch: Vec::new(),
        }
    }

    fn stable_dt(&self, values: &[f64]) -> f64 {
        let mut peak = values.iter().copied().fold(0.0, f64::max);
        if let BoundaryCondition::Dirichlet(g) = self.cfg.bc {
            peak = peak.max(g);
        }
        stable_dt_for_peak(peak, self.mesh.h, self.w_max, &self.cfg)
    }

    fn eval_lpsi(&mut self, values: &[f64]) {
        for (p, &m) in self.psi.iter_mut().zip(values) {
            *p = self.power.eval(m.max(0.0));
        }
        apply_l_into(&self.psi, self.mesh, self.psi_bc, &mut self.lpsi);
    }

    fn explicit(&mut self, values: &mut [f64], dt: f64) -> Result<()> {
        self.eval_lpsi(values);
        let k = dt * self.c_eq;
        for (cell, (m, l)) in values.iter_mut().zip(&self.lpsi).enumerate() {
            let next = *m + k * l;
            if next < 0.0 {
                if next < -NEGATIVE_CLAMP || next.is_nan() {
                    return Err(Error::Stability { dt, cell, value: next });
                }
                *m = 0.0;
            } else if !next.is_finite() {
                return Err(Error::Stability { dt, cell, value: next });
            } else {
                *m = next;
            }
        }
        Ok(())
    }

    /// Backward Euler step; `values` is untouched on failure.
    fn implicit(&mut self, values: &mut [f64], dt: f64) -> Result<()> {
        let n = values.len();
        if self.stencil.is_none() {
            self.stencil = Some(operators::stencil(self.mesh, self.psi_bc));
        }
        let k = dt * self.c_eq;
        let old = values.to_vec();
        let mut next = old.clone();
        let mut residual = vec![0.0; n];
        let beta = self.cfg.beta;
        let dpow = Power::new(beta);
        self.jl.resize(n, 0.0);
        self.jd.resize(n, 0.0);
        self.ju.resize(n, 0.0);

        let mut res_norm = f64::INFINITY;
        for iter in 0..=self.cfg.newton_max_iter {
            self.eval_lpsi(&next);
            res_norm = 0.0;
            for i in 0..n {
                residual[i] = next[i] - k * self.lpsi[i] - old[i];
                res_norm = f64::max(res_norm, residual[i].abs());
            }
            if !res_norm.is_finite() {
                break;
            }
            if res_norm <= self.cfg.newton_tol {
                for (v, m) in values.iter_mut().zip(&next) {
                    *v = m.max(0.0);
                }
                return Ok(());
            }
            if iter == self.cfg.newton_max_iter {
                break;
            }
            let s = self.stencil.as_ref().expect("stencil built above");
            let dpsi = |u: f64| (1.0 + beta) * dpow.eval(u.max(0.0));
            for i in 0..n {
                self.jd[i] = 1.0 - k * s.diag[i] * dpsi(next[i]);
                self.jl[i] = if i > 0 { -k * s.lower[i] * dpsi(next[i - 1]) } else { 0.0 };
                self.ju[i] = if i + 1 < n { -k * s.upper[i] * dpsi(next[i + 1]) } else { 0.0 };
                residual[i] = -residual[i];
            }
            if !tridiag::solve(&self.jl, &self.jd, &self.ju, &mut residual, &mut self.scratch) {
                break;
            }
            for (m, d) in next.iter_mut().zip(&residual) {
                *m += d;
            }
        }
        Err(Error::Newton {
            iterations: self.cfg.newton_max_iter,
            residual: res_norm,
            dt,
        })
    }
}

fn check_step_inputs(field: &DensityField, mesh: &WeightedMesh, cfg: &SolverConfig, dt: f64) -> Result<()> {
    cfg.validate()?;
    mesh.check_field(&field.values)?;
    validate_density(&field.values)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", "must be positive"));
    }
    Ok(())
}

/// `mu' = mu + dt * c_eq * L_h Psi(mu)`. The caller keeps `dt <= stable_dt`.
pub fn step_explicit(field: &DensityField, mesh: &WeightedMesh, cfg: &SolverConfig, dt: f64) -> Result<DensityField> {
    check_step_inputs(field, mesh, cfg, dt)?;
    let mut values = field.values.clone();
    Stepper::new(mesh, cfg).explicit(&mut values, dt)?;
    Ok(DensityField {
        values,
        time: field.time + dt,
    })
}

/// Solves `mu' - dt * c_eq * L_h Psi(mu') = mu` by Newton.
pub fn step_implicit(field: &DensityField, mesh: &WeightedMesh, cfg: &SolverConfig, dt: f64) -> Result<DensityField> {
    check_step_inputs(field, mesh, cfg, dt)?;
    let mut values = field.values.clone();
    Stepper::new(mesh, cfg).implicit(&mut values, dt)?;
    Ok(DensityField {
        values,
        time: field.time + dt,
    })
}

/// Per-snapshot functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// `int mu dpi`
    pub mass: f64,
    /// `int mu^p dpi`
    pub lp_integral: f64,
    /// `K_p = log(int mu^p dpi) / (p - 1)`; `-inf` for the zero field.
    pub kp: f64,
    /// `D_p = log ||mu||_p - log m0`; `-inf` for the zero field.
    pub dp: f64,
    /// Dirichlet energy of `mu^{(p+beta)/2}`.
    pub energy: f64,
}

impl Diagnostics {
    pub fn compute(values: &[f64], mesh: &WeightedMesh, p: f64, beta: f64, initial_mass: f64) -> Self {
        let mass = mesh.integrate(values);
        let pow_p = Power::new(p);
        let lp_integral = mesh.integrate_with(values, |u| pow_p.eval(u));
        let kp = lp_integral.ln() / (p - 1.0);
        let dp = lp_integral.ln() / p - initial_mass.ln();
        let half = Power::new(0.5 * (p + beta));
        let root: Vec<f64> = values.iter().map(|&u| half.eval(u)).collect();
        let energy = operators::dirichlet_energy(&root, mesh).expect("lengths checked by caller");
        Diagnostics {
            mass,
            lp_integral,
            kp,
            dp,
            energy,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: DensityField,
    pub diagnostics: Diagnostics,
}

impl Snapshot {
    pub fn t(&self) -> f64 {
        self.field.time
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub config: SolverConfig,
    /// Exponent used for the diagnostics.
    pub p: f64,
    /// `m0 = int mu(0) dpi`, the reference mass in `D_p`.
    pub initial_mass: f64,
    /// Number of accepted time steps.
    pub steps: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(Snapshot::t).collect()
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectories always hold the initial snapshot")
    }

    /// Snapshot recorded at exactly `t` (up to relative `1e-12`).
    pub fn at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .find(|s| (s.t() - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    /// Largest `|m(t) - m(0)| / m(0)` over the snapshots.
    pub fn max_relative_mass_drift(&self) -> f64 {
        let m0 = self.snapshots[0].diagnostics.mass;
        self.snapshots
            .iter()
            .map(|s| ((s.diagnostics.mass - m0) / m0).abs())
            .fold(0.0, f64::max)
    }
}

fn validate_run(initial: &DensityField, mesh: &WeightedMesh, cfg: &SolverConfig, horizon: f64, output_times: &[f64], p: f64) -> Result<()> {
    cfg.validate()?;
    mesh.check_field(&initial.values)?;
    validate_density(&initial.values)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::param("horizon", "must be positive and finite"));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::param("p", "diagnostics need p > 1"));
    }
    for w in output_times.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::param("output_times", "must be strictly increasing"));
        }
    }
    if let (Some(&first), Some(&last)) = (output_times.first(), output_times.last()) {
        if first < 0.0 || last > horizon * (1.0 + 1e-12) {
            return Err(Error::param("output_times", format!("must lie in [0, {horizon}]")));
        }
    }
    let m0 = mesh.integrate(&initial.values);
    if !(m0 > 0.0) {
        return Err(Error::param("initial", "needs positive mass"));
    }
    Ok(())
}

/// Integrates to `horizon`, recording snapshots at `output_times` (plus `t = 0`).
///
/// Returns whatever was recorded together with the error that stopped the
/// integration, if any.
pub fn run_partial(
    initial: &DensityField,
    mesh: &WeightedMesh,
    cfg: &SolverConfig,
    horizon: f64,
    output_times: &[f64],
    p: f64,
) -> (Trajectory, Option<Error>) {
    let m0 = mesh.integrate(&initial.values);
    let mut traj = Trajectory {
        snapshots: Vec::new(),
        config: *cfg,
        p,
        initial_mass: m0,
        steps: 0,
    };
    if let Err(e) = validate_run(initial, mesh, cfg, horizon, output_times, p) {
        return (traj, Some(e));
    }
    let record = |traj: &mut Trajectory, values: &[f64], t: f64| {
        traj.snapshots.push(Snapshot {
            field: DensityField {
                values: values.to_vec(),
                time: t,
            },
            diagnostics: Diagnostics::compute(values, mesh, p, cfg.beta, m0),
        });
    };

    let mut values = initial.values.clone();
    let mut t = 0.0;
    record(&mut traj, &values, 0.0);

    let mut targets: Vec<(f64, bool)> = output_times
        .iter()
        .filter(|&&s| s > 0.0)
        .map(|&s| (s.min(horizon), true))
        .collect();
    if targets.last().is_none_or(|&(s, _)| s < horizon) {
        targets.push((horizon, false));
    }

    let mut stepper = Stepper::new(mesh, cfg);
    let mut dt_implicit = cfg.dt_max;
    for (target, recorded) in targets {
        while t < target {
            let remaining = target - t;
            let result = match cfg.scheme {
                Scheme::ExplicitEuler => {
                    let dt = stepper.stable_dt(&values).min(remaining);
                    stepper.explicit(&mut values, dt).map(|_| dt)
                }
                Scheme::ImplicitEuler => {
                    let mut outcome = Err(Error::Newton {
                        iterations: 0,
                        residual: f64::NAN,
                        dt: dt_implicit,
                    });
                    for _ in 0..40 {
                        let dt = dt_implicit.min(remaining);
                        match stepper.implicit(&mut values, dt) {
                            Ok(()) => {
                                outcome = Ok(dt);
                                dt_implicit = (2.0 * dt_implicit).min(cfg.dt_max);
                                break;
                            }
                            Err(e) => {
                                outcome = Err(e);
                                dt_implicit *= 0.5;
                            }
                        }
                    }
                    outcome
                }
            };
            match result {
                Ok(dt) => {
                    traj.steps += 1;
                    t = if dt >= remaining { target } else { t + dt };
                }
                Err(e) => {
                    return (
                        traj,
                        Some(Error::Integration {
                            t,
                            source: Box::new(e),
                        }),
                    )
                }
            }
        }
        if recorded {
            record(&mut traj, &values, target);
        }
    }
    (traj, None)
}

/// [`run_partial`] that discards the partial trajectory on failure.
pub fn run(
    initial: &DensityField,
    mesh: &WeightedMesh,
    cfg: &SolverConfig,
    horizon: f64,
    output_times: &[f64],
    p: f64,
) -> Result<Trajectory> {
    match run_partial(initial, mesh, cfg, horizon, output_times, p) {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// Ball problems with boundary value `2^-i` and data `initial + 2^-i`, `i = 1..=levels`.
///
/// Levels run concurrently; the result is ordered by `i`.
pub fn run_dirichlet_cascade(
    initial: &DensityField,
    mesh: &WeightedMesh,
    cfg: &SolverConfig,
    horizon: f64,
    output_times: &[f64],
    p: f64,
    levels: usize,
) -> Result<Vec<Trajectory>> {
    if levels < 2 {
        return Err(Error::param("levels", "need at least 2 levels"));
    }
    if !matches!(cfg.bc, BoundaryCondition::Dirichlet(_)) {
        return Err(Error::param("bc", "the cascade needs Dirichlet boundaries"));
    }
    validate_density(&initial.values)?;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (1..=levels)
            .map(|i| {
                let offset = 0.5f64.powi(i as i32);
                let level_cfg = SolverConfig {
                    bc: BoundaryCondition::Dirichlet(offset),
                    ..*cfg
                };
                let data = DensityField {
                    values: initial.values.iter().map(|v| v + offset).collect(),
                    time: 0.0,
                };
                scope.spawn(move || run(&data, mesh, &level_cfg, horizon, output_times, p))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("cascade worker panicked"))
            .collect()
    })
}

/// Maps a solution `mu` to `eta * mu(eta^beta t)`, the solution with data `eta * mu(0)`.
pub fn rescale_solution(traj: &Trajectory, eta: f64) -> Result<Trajectory> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::param("eta", "must be positive"));
    }
    let beta = traj.config.beta;
    let p = traj.p;
    let time_factor = eta.powf(-beta);
    let snapshots = traj
        .snapshots
        .iter()
        .map(|s| {
            let d = s.diagnostics;
            Snapshot {
                field: DensityField {
                    values: s.field.values.iter().map(|v| v * eta).collect(),
                    time: s.field.time * time_factor,
                },
                diagnostics: Diagnostics {
                    mass: d.mass * eta,
                    lp_integral: d.lp_integral * eta.powf(p),
                    kp: d.kp + p / (p - 1.0) * eta.ln(),
                    dp: d.dp,
                    energy: d.energy * eta.powf(p + beta),
                },
            }
        })
        .collect();
    Ok(Trajectory {
        snapshots,
        config: traj.config,
        p,
        initial_mass: traj.initial_mass * eta,
        steps: traj.steps,
    })
}
