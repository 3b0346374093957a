//! Runs a [`RunConfig`]: the main integration, the auxiliary runs behind the
//! requested checks, and the two CSV result files.

use std::fmt;
use std::path::Path;

use crate::analysis::{
    aronson_benilan_margin, barrier_margin, barrier_select, decay_envelope, dissipation_constant, dp_series,
    l1_distance, measure_barrier_inputs, trajectory_t0_mode, unconditional_kp_bound, EnvelopeParams, T0Mode,
};
use crate::config::{Check, RunConfig};
use crate::error::{Error, Result};
use crate::evolve::{rescale_solution, run, run_dirichlet_cascade, run_partial, SolverConfig, Trajectory};
use crate::mesh::{DensityField, WeightedMesh};
use crate::operators::BoundaryCondition;
use crate::spectral::estimate_poincare;

pub const MASS_TOL: f64 = 1e-10;
pub const ORDER_TOL: f64 = 1e-8;
pub const ENVELOPE_SLACK: f64 = 0.05;
pub const DISSIPATION_TOL: f64 = 0.02;
/// Snapshots with a smaller minimum are too close to vacuum for the dissipation identity.
pub const DISSIPATION_POSITIVITY: f64 = 1e-6;
/// Smallest relative change of `int mu^p dpi` across a centred difference that
/// is resolved above rounding; flatter stencils measure noise, not the identity.
pub const DISSIPATION_RESOLUTION: f64 = 1e-8;
/// Bound on `beta t (L nu + c_AB / (beta t))` from below.
pub const AB_TOL: f64 = 0.05;
pub const SCALING_TOL: f64 = 5e-4;

pub const TRAJECTORY_HEADER: [&str; 9] = [
    "t",
    "mass",
    "kp",
    "dp",
    "envelope",
    "unconditional_bound",
    "dissipation_lhs",
    "dissipation_rhs",
    "ab_margin",
];
pub const SUMMARY_HEADER: [&str; 5] = ["check", "status", "measured", "bound", "slack"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Not evaluated because the main run failed.
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        })
    }
}

/// One line of the summary: `measured` against `bound`, `slack >= 0` on success.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub status: Status,
    pub measured: f64,
    pub bound: f64,
    pub slack: f64,
    /// Human-readable context (not written to the CSV).
    pub note: Option<String>,
}

impl CheckRow {
    /// `measured <= bound`.
    fn at_most(check: &str, measured: f64, bound: f64) -> Self {
        Self::from_slack(check, measured, bound, bound - measured)
    }

    /// `measured >= bound`.
    fn at_least(check: &str, measured: f64, bound: f64) -> Self {
        Self::from_slack(check, measured, bound, measured - bound)
    }

    fn from_slack(check: &str, measured: f64, bound: f64, slack: f64) -> Self {
        CheckRow {
            check: check.into(),
            status: if slack >= 0.0 { Status::Pass } else { Status::Fail },
            measured,
            bound,
            slack,
            note: None,
        }
    }

    fn failed(check: &str, error: &Error) -> Self {
        CheckRow {
            check: check.into(),
            status: Status::Fail,
            measured: f64::NAN,
            bound: f64::NAN,
            slack: f64::NAN,
            note: Some(error.to_string()),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Everything a scenario produced.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub config: RunConfig,
    pub mesh: WeightedMesh,
    /// Discrete Poincaré constant of the mesh (used by the envelope).
    pub lambda: Option<f64>,
    /// Complete, or partial when `failure` is set.
    pub trajectory: Trajectory,
    pub rows: Vec<CheckRow>,
    pub failure: Option<Error>,
}

impl ScenarioOutcome {
    /// True when every summary row passed.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status == Status::Pass)
    }

    /// Per-output-time diagnostics, one entry per column of [`TRAJECTORY_HEADER`].
    pub fn trajectory_table(&self) -> Vec<[f64; 9]> {
        let traj = &self.trajectory;
        let times = traj.times();
        let beta = traj.config.beta;
        let m0 = traj.initial_mass;
        let envelope = self.lambda.and_then(|l| envelope_setup(traj, l).ok());
        let unit_mass = (m0 - 1.0).abs() <= 1e-9;
        let conservative = traj.config.bc == BoundaryCondition::ZeroFlux;
        let k = dissipation_constant(traj.p, beta, traj.config.normalization);
        let requested = |t: f64| {
            self.config
                .output_times
                .iter()
                .any(|&s| (s - t).abs() <= 1e-12 * s.abs().max(1.0))
        };

        let mut table = Vec::new();
        for (i, snap) in traj.snapshots.iter().enumerate() {
            let t = snap.t();
            if !requested(t) {
                continue;
            }
            let d = &snap.diagnostics;
            let env = match (&envelope, conservative) {
                (Some((params, _)), true) if t == 0.0 => params.dp0,
                (Some((params, mode)), true) => decay_envelope(params, t, *mode).unwrap_or(f64::NAN),
                _ => f64::NAN,
            };
            let bound = match self.lambda {
                Some(l) if unit_mass && t > 0.0 => unconditional_kp_bound(l, beta, traj.p, t).unwrap_or(f64::NAN),
                _ => f64::NAN,
            };
            let uniform = i > 0
                && i + 1 < times.len()
                && ((times[i + 1] - t) - (t - times[i - 1])).abs() <= 1e-9 * (times[i + 1] - times[i - 1]);
            let (lhs, rhs) = if uniform && conservative {
                let s = &traj.snapshots;
                (
                    (s[i + 1].diagnostics.lp_integral - s[i - 1].diagnostics.lp_integral) / (times[i + 1] - times[i - 1]),
                    -k * d.energy,
                )
            } else {
                (f64::NAN, f64::NAN)
            };
            let ab = if t > 0.0 {
                aronson_benilan_margin(&snap.field, &self.mesh, beta, t, traj.config.normalization).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            };
            table.push([t, d.mass, d.kp, d.dp, env, bound, lhs, rhs, ab]);
        }
        table
    }

    /// Writes `trajectory.csv` and `summary.csv` into `dir` (created if needed).
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("trajectory.csv"))?;
        w.write_record(TRAJECTORY_HEADER)?;
        for row in self.trajectory_table() {
            w.write_record(row.iter().map(|v| format_sig(*v)))?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
        w.write_record(SUMMARY_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.check.clone(),
                r.status.to_string(),
                format_sig(r.measured),
                format_sig(r.bound),
                format_sig(r.slack),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Decimal rendering with 12 significant digits, `%g`-style.
pub fn format_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..12).contains(&exp) {
        trim(&format!("{:.*}", (11 - exp) as usize, v))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

/// Envelope parameters and phase boundary of a conservative trajectory.
fn envelope_setup(traj: &Trajectory, lambda: f64) -> Result<(EnvelopeParams, T0Mode)> {
    let m0 = traj.initial_mass;
    let dps = dp_series(traj, m0);
    let params = EnvelopeParams::new(lambda, traj.config.beta, traj.p, m0, dps[0].max(0.0))?;
    let mode = trajectory_t0_mode(traj, m0).unwrap_or(T0Mode::FromTrajectory {
        t0: f64::INFINITY,
        dp_at_t0: params.threshold(),
    });
    Ok((params, mode))
}

/// Largest `D_p(t) - envelope(t)` over snapshots with `t >= from`.
pub fn envelope_excess(traj: &Trajectory, lambda: f64, from: f64) -> Result<f64> {
    let (params, mode) = envelope_setup(traj, lambda)?;
    let dps = dp_series(traj, traj.initial_mass);
    let mut worst = f64::NEG_INFINITY;
    for (snap, d) in traj.snapshots.iter().zip(&dps) {
        let t = snap.t();
        if t >= from && t > 0.0 {
            worst = worst.max(d - decay_envelope(&params, t, mode)?);
        }
    }
    Ok(worst)
}

/// Interior snapshots at `t >= from` where the dissipation identity is
/// measurable: uniformly spaced neighbours, positive (`min mu >=
/// DISSIPATION_POSITIVITY`) and either constant or with a centred change of
/// `int mu^p dpi` above `DISSIPATION_RESOLUTION`.
pub fn resolved_dissipation_indices(traj: &Trajectory, from: f64) -> Vec<usize> {
    let s = &traj.snapshots;
    let constant = |i: usize| s[i].field.max() == s[i].field.min();
    let resolved = |i: usize| {
        let (a, b) = (s[i - 1].diagnostics.lp_integral, s[i + 1].diagnostics.lp_integral);
        (a - b).abs() >= DISSIPATION_RESOLUTION * s[i].diagnostics.lp_integral
    };
    (1..s.len().saturating_sub(1))
        .filter(|&i| s[i].t() >= from)
        .filter(|&i| (i - 1..=i + 1).all(|j| s[j].field.min() >= DISSIPATION_POSITIVITY))
        .filter(|&i| resolved(i) || constant(i))
        .filter(|&i| crate::analysis::dissipation_residual(traj, i, traj.p).is_ok())
        .collect()
}

/// Largest dissipation residual over [`resolved_dissipation_indices`];
/// `None` when no snapshot qualifies.
pub fn worst_dissipation_residual(traj: &Trajectory, from: f64) -> Option<f64> {
    resolved_dissipation_indices(traj, from)
        .into_iter()
        .filter_map(|i| crate::analysis::dissipation_residual(traj, i, traj.p).ok())
        .reduce(f64::max)
}

/// Smallest `beta t * aronson_benilan_margin` over snapshots with `t >= from`.
pub fn worst_ab_margin(traj: &Trajectory, mesh: &WeightedMesh, from: f64) -> Result<f64> {
    let beta = traj.config.beta;
    let mut worst = f64::INFINITY;
    for snap in &traj.snapshots {
        let t = snap.t();
        if t >= from && t > 0.0 {
            let m = aronson_benilan_margin(&snap.field, mesh, beta, t, traj.config.normalization)?;
            worst = worst.min(m * beta * t);
        }
    }
    Ok(worst)
}

/// Consecutive L1 distances of two trajectories recorded on the same grid.
pub fn l1_series(a: &Trajectory, b: &Trajectory, mesh: &WeightedMesh) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::Shape {
            expected: a.len(),
            actual: b.len(),
        });
    }
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| l1_distance(&x.field, &y.field, mesh))
        .collect()
}

/// Largest increase between consecutive entries (`-inf` for fewer than two).
pub fn max_increase(series: &[f64]) -> f64 {
    series
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest pointwise `upper - lower` over all snapshots.
pub fn min_gap(upper: &Trajectory, lower: &Trajectory) -> f64 {
    upper
        .snapshots
        .iter()
        .zip(&lower.snapshots)
        .flat_map(|(u, l)| u.field.values.iter().zip(&l.field.values).map(|(a, b)| a - b))
        .fold(f64::INFINITY, f64::min)
}

fn join<T>(handle: std::thread::ScopedJoinHandle<'_, T>) -> T {
    handle.join().expect("scenario worker panicked")
}

fn shifted(field: &DensityField, offset: f64) -> DensityField {
    DensityField {
        values: field.values.iter().map(|v| v + offset).collect(),
        time: field.time,
    }
}

/// Runs the main integration and every requested check.
///
/// Errors only for configurations that cannot be set up (mesh or initial
/// data); solver failures are reported through [`ScenarioOutcome::failure`].
pub fn run_scenario(cfg: &RunConfig) -> Result<ScenarioOutcome> {
    let mesh = cfg.mesh()?;
    let initial = cfg.initial.build(&mesh)?;
    let solver = cfg.solver;
    let (horizon, times, p) = (cfg.horizon, cfg.output_times.as_slice(), cfg.p);
    let checks = &cfg.checks;

    // every auxiliary run is independent of the main one
    let (main, lambda, mut partner, mut upper, mut scaled, mut cascade) = std::thread::scope(|scope| {
        let lambda = scope.spawn(|| estimate_poincare(&mesh).map(|r| r.lambda));
        let partner = cfg.has_check(Check::Contraction).then(|| {
            scope.spawn(|| {
                let data = checks.partner.build(&mesh)?;
                run(&data, &mesh, &solver, horizon, times, p)
            })
        });
        let upper = cfg.has_check(Check::Comparison).then(|| {
            scope.spawn(|| run(&shifted(&initial, checks.comparison_offset), &mesh, &solver, horizon, times, p))
        });
        let scaled = cfg.has_check(Check::Scaling).then(|| {
            scope.spawn(|| {
                let eta = checks.scaling_eta;
                let factor = eta.powf(-solver.beta);
                let data = DensityField {
                    values: initial.values.iter().map(|v| eta * v).collect(),
                    time: 0.0,
                };
                let scaled_times: Vec<f64> = times.iter().map(|t| t * factor).collect();
                run(&data, &mesh, &solver, horizon * factor, &scaled_times, p)
            })
        });
        let cascade = cfg.has_check(Check::Cascade).then(|| {
            scope.spawn(|| {
                let level_cfg = SolverConfig {
                    bc: BoundaryCondition::Dirichlet(0.0),
                    ..solver
                };
                run_dirichlet_cascade(&initial, &mesh, &level_cfg, horizon, times, p, checks.cascade_levels)
            })
        });
        let main = run_partial(&initial, &mesh, &solver, horizon, times, p);
        (
            main,
            join(lambda),
            partner.map(join),
            upper.map(join),
            scaled.map(join),
            cascade.map(join),
        )
    });
    let (trajectory, failure) = main;

    let mut rows = Vec::new();
    if let Some(err) = &failure {
        let name = match err.root() {
            Error::Stability { .. } => "solver_stability",
            Error::Newton { .. } => "solver_newton",
            _ => "solver",
        };
        rows.push(CheckRow::failed(name, err));
        for c in &checks.run {
            rows.push(CheckRow {
                check: c.name().into(),
                status: Status::Skipped,
                measured: f64::NAN,
                bound: f64::NAN,
                slack: f64::NAN,
                note: Some("main run failed".into()),
            });
        }
        return Ok(ScenarioOutcome {
            config: cfg.clone(),
            mesh,
            lambda: lambda.ok(),
            trajectory,
            rows,
            failure,
        });
    }

    let h2 = mesh.h * mesh.h;
    for &check in &checks.run {
        let name = check.name();
        let row = match check {
            Check::Mass => Ok(CheckRow::at_most(name, trajectory.max_relative_mass_drift(), MASS_TOL)),
            Check::Contraction => partner
                .take()
                .expect("spawned")
                .and_then(|b| l1_series(&trajectory, &b, &mesh))
                .map(|d| CheckRow::at_most(name, max_increase(&d), ORDER_TOL + 10.0 * h2)),
            Check::Comparison => upper
                .take()
                .expect("spawned")
                .map(|u| CheckRow::at_least(name, min_gap(&u, &trajectory), -ORDER_TOL)),
            Check::Envelope => lambda
                .clone()
                .and_then(|l| envelope_excess(&trajectory, l, checks.window_start))
                .map(|e| CheckRow::at_most(name, e, ENVELOPE_SLACK)),
            Check::Dissipation => Ok(match worst_dissipation_residual(&trajectory, checks.window_start) {
                Some(r) => CheckRow::at_most(name, r, DISSIPATION_TOL),
                None => CheckRow::from_slack(name, f64::NAN, DISSIPATION_TOL, f64::NAN)
                    .with_note("no snapshot triple is positive, uniformly spaced and resolved"),
            }),
            Check::Ab => worst_ab_margin(&trajectory, &mesh, checks.window_start)
                .map(|m| CheckRow::at_least(name, m, -AB_TOL)),
            Check::Barrier => (|| {
                let (c, zeta) =
                    measure_barrier_inputs(&trajectory, &mesh, checks.barrier_radius, checks.barrier_center)?;
                let params = barrier_select(
                    c,
                    checks.barrier_radius,
                    checks.barrier_center,
                    zeta,
                    solver.beta,
                    &cfg.potential,
                )?;
                let m = barrier_margin(&trajectory, &mesh, solver.beta, &params, solver.normalization)?;
                Ok(CheckRow::at_least(name, m, -10.0 * h2).with_note(format!(
                    "c = {c}, zeta = {zeta}, epsilon = {}, tau = {}",
                    params.epsilon, params.tau
                )))
            })(),
            Check::Scaling => scaled.take().expect("spawned").and_then(|b| {
                let a = rescale_solution(&trajectory, checks.scaling_eta)?;
                let d = l1_series(&a, &b, &mesh)?;
                Ok(CheckRow::at_most(name, d.iter().copied().fold(0.0, f64::max), SCALING_TOL))
            }),
            Check::Cascade => cascade
                .take()
                .expect("spawned")
                .and_then(|levels| cascade_row(&levels, &mesh, checks.cascade_levels)),
        };
        rows.push(row.unwrap_or_else(|e| CheckRow::failed(name, &e)));
    }

    Ok(ScenarioOutcome {
        config: cfg.clone(),
        mesh,
        lambda: lambda.ok(),
        trajectory,
        rows,
        failure: None,
    })
}

/// Measurements of a Dirichlet cascade with boundary data `2^-i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeReport {
    /// Smallest `mu_i - mu_{i+1}` over levels, snapshots and cells.
    pub min_order_gap: f64,
    /// L1 distance of the two deepest levels at `t = 0`.
    pub initial_gap: f64,
    /// Largest increase of that distance between snapshots.
    pub gap_increase: f64,
}

pub fn cascade_report(levels: &[Trajectory], mesh: &WeightedMesh) -> Result<CascadeReport> {
    if levels.len() < 2 {
        return Err(Error::param("levels", "need at least 2 levels"));
    }
    let min_order_gap = levels
        .windows(2)
        .map(|w| min_gap(&w[0], &w[1]))
        .fold(f64::INFINITY, f64::min);
    let d = l1_series(&levels[levels.len() - 2], &levels[levels.len() - 1], mesh)?;
    Ok(CascadeReport {
        min_order_gap,
        initial_gap: d[0],
        gap_increase: max_increase(&d),
    })
}

fn cascade_row(levels: &[Trajectory], mesh: &WeightedMesh, count: usize) -> Result<CheckRow> {
    let r = cascade_report(levels, mesh)?;
    let gap_bound = 2.0 * 0.5f64.powi(count as i32);
    let slack = (r.min_order_gap + ORDER_TOL)
        .min(gap_bound - r.initial_gap)
        .min(ORDER_TOL - r.gap_increase);
    Ok(CheckRow::from_slack("cascade", r.min_order_gap, -ORDER_TOL, slack).with_note(format!(
        "deepest-level L1 gap {} at t = 0 (bound {gap_bound}), largest increase {}",
        r.initial_gap, r.gap_increase
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, preset};

    #[test]
    fn formats_twelve_significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(-2.5), "-2.5");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(format_sig(123456.789), "123456.789");
        assert_eq!(format_sig(9.999999999999999), "10");
        assert_eq!(format_sig(1e20), "1e20");
        assert_eq!(format_sig(f64::NAN), "nan");
        assert_eq!(format_sig(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn row_status_follows_slack() {
        assert_eq!(CheckRow::at_most("x", 1.0, 2.0).status, Status::Pass);
        assert_eq!(CheckRow::at_most("x", 3.0, 2.0).status, Status::Fail);
        assert_eq!(CheckRow::at_least("x", -1.0, -2.0).slack, 1.0);
        assert_eq!(CheckRow::from_slack("x", f64::NAN, 1.0, f64::NAN).status, Status::Fail);
    }

    #[test]
    fn series_helpers() {
        assert_eq!(max_increase(&[3.0, 2.0, 2.5, 1.0]), 0.5);
        assert_eq!(max_increase(&[1.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn stationary_preset_passes_everything() {
        let cfg = preset("stationary").unwrap().config();
        let out = run_scenario(&cfg).unwrap();
        assert!(out.failure.is_none());
        for r in &out.rows {
            assert_eq!(r.status, Status::Pass, "{r:?}");
        }
        let table = out.trajectory_table();
        assert_eq!(table.len(), cfg.output_times.len());
        for row in &table {
            assert!(row[3].abs() <= 1e-12, "{row:?}");
        }
    }

    #[test]
    fn violated_cfl_reports_a_stability_row() {
        let cfg = parse_config(
            r#"
[mesh]
half_width = 5.0
cells = 256
[solver]
cfl_safety = 5.0
[initial]
kind = "gaussian_bump"
width = 0.5
[time]
horizon = 1.0
output_count = 11
[checks]
run = ["mass"]
"#,
        )
        .unwrap();
        let out = run_scenario(&cfg).unwrap();
        assert!(out.failure.is_some());
        assert!(!out.passed());
        assert_eq!(out.rows[0].check, "solver_stability");
        assert_eq!(out.rows[1].status, Status::Skipped);
        assert!(!out.trajectory.is_empty());
    }

    #[test]
    fn explicit_times_are_written_verbatim() {
        let cfg = parse_config(
            "[mesh]\nhalf_width = 4.0\ncells = 64\n[time]\nhorizon = 1.0\noutput_times = [0.1, 0.5, 1.0]\n[checks]\nrun = [\"mass\"]\n",
        )
        .unwrap();
        let out = run_scenario(&cfg).unwrap();
        let ts: Vec<f64> = out.trajectory_table().iter().map(|r| r[0]).collect();
        assert_eq!(ts, vec![0.1, 0.5, 1.0]);
    }
}
