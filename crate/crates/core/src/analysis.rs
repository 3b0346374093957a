//! Functionals monitored along the flow and the quantitative bounds they obey:
//! `K_p`, `D_p`, the two-phase decay envelope, the unconditional `K_p` bound,
//! the dissipation identity, the Aronson–Bénilan one-sided bound on the
//! pressure, the parabolic barrier and the L1 distance.

use crate::error::{check_len, Error, Result};
use crate::evolve::{Normalization, Trajectory};
use crate::mesh::{lp_norm, DensityField, Potential, WeightedMesh};
use crate::operators::{apply_l, pressure_values, BoundaryCondition};

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::param("p", "must exceed 1"))
    }
}

/// `K_p = (p-1)^{-1} log(int mu^p dpi)`.
pub fn kp(field: &DensityField, mesh: &WeightedMesh, p: f64) -> Result<f64> {
    check_p(p)?;
    let norm = lp_norm(field, mesh, p)?;
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(p * norm.ln() / (p - 1.0))
}

/// `D_p = log ||mu||_{L^p(pi)} - log m`.
pub fn dp(field: &DensityField, mesh: &WeightedMesh, p: f64, mass: f64) -> Result<f64> {
    check_p(p)?;
    if !(mass > 0.0) {
        return Err(Error::param("mass", "must be positive"));
    }
    let norm = lp_norm(field, mesh, p)?;
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(norm.ln() - mass.ln())
}

/// Parameters of the two-phase decay envelope for `D_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    pub lambda: f64,
    pub beta: f64,
    pub p: f64,
    /// `||mu_0||_{L1(pi)}`.
    pub mass: f64,
    /// `D_p(mu_0)`; may be `+inf` for data outside `L^p`.
    pub dp0: f64,
}

impl EnvelopeParams {
    pub fn new(lambda: f64, beta: f64, p: f64, mass: f64, dp0: f64) -> Result<Self> {
        let params = EnvelopeParams {
            lambda,
            beta,
            p,
            mass,
            dp0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("lambda", "must be positive"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::param("beta", "must be positive"));
        }
        check_p(self.p)?;
        if self.p + self.beta < 2.0 {
            return Err(Error::param("p", "the smoothing estimate requires p + beta >= 2"));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::param("mass", "must be positive"));
        }
        if !(self.dp0 >= 0.0) {
            return Err(Error::param("dp0", "must be nonnegative (or +inf)"));
        }
        Ok(())
    }

    /// `(p-1)/p`, the level separating the two phases.
    pub fn threshold(&self) -> f64 {
        (self.p - 1.0) / self.p
    }

    /// Slope `2 beta lambda (p-1) m^beta / (p+beta)^2` of the phase-one log argument.
    fn phase_one_slope(&self) -> f64 {
        2.0 * self.beta * self.lambda * (self.p - 1.0) * self.mass.powf(self.beta)
            / (self.p + self.beta).powi(2)
    }

    /// Exponential rate `2 p lambda m^beta / (p+beta)^2` of phase two.
    pub fn phase_two_rate(&self) -> f64 {
        2.0 * self.p * self.lambda * self.mass.powf(self.beta) / (self.p + self.beta).powi(2)
    }

    /// Super-exponential phase-one bound `-log(e^{-beta dp0} + a t) / beta`.
    pub fn phase_one(&self, t: f64) -> f64 {
        let start = (-self.beta * self.dp0).exp();
        -(start + self.phase_one_slope() * t).ln() / self.beta
    }

    /// Time at which the phase-one bound reaches the threshold (0 if it starts below).
    pub fn envelope_t0(&self) -> f64 {
        let thr = self.threshold();
        if self.dp0 <= thr {
            return 0.0;
        }
        ((-self.beta * thr).exp() - (-self.beta * self.dp0).exp()) / self.phase_one_slope()
    }
}

/// How the phase boundary of the envelope is placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum T0Mode {
    /// Measured regime-change time and the measured `D_p` there.
    FromTrajectory { t0: f64, dp_at_t0: f64 },
    /// The phase-one bound's own crossing of `(p-1)/p`.
    FromEnvelope,
}

pub fn decay_envelope(params: &EnvelopeParams, t: f64, mode: T0Mode) -> Result<f64> {
    params.validate()?;
    if !(t > 0.0) {
        return Err(Error::param("t", "envelope is defined for t > 0"));
    }
    let (t0, boundary) = match mode {
        T0Mode::FromTrajectory { t0, dp_at_t0 } => (t0, dp_at_t0),
        T0Mode::FromEnvelope => (params.envelope_t0(), params.dp0.min(params.threshold())),
    };
    if t < t0 {
        Ok(params.phase_one(t))
    } else {
        Ok((-params.phase_two_rate() * (t - t0)).exp() * boundary)
    }
}

/// Data-independent bound `max{-p log(2 beta lambda (p-1) t/(p+beta)^2) / (beta (p-1)), 1}`
/// on `K_p` for unit-mass data.
pub fn unconditional_kp_bound(lambda: f64, beta: f64, p: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::param("t", "bound is defined for t > 0"));
    }
    check_p(p)?;
    if !(lambda > 0.0 && beta > 0.0) {
        return Err(Error::param("lambda", "lambda and beta must be positive"));
    }
    let arg = 2.0 * beta * lambda * (p - 1.0) * t / (p + beta).powi(2);
    Ok((-p * arg.ln() / (beta * (p - 1.0))).max(1.0))
}

/// First time `D_p` drops to `(p-1)/p`, linearly interpolated between snapshots.
pub fn t0_from_series(times: &[f64], dp: &[f64], p: f64) -> Option<f64> {
    let thr = (p - 1.0) / p;
    let first = *dp.first()?;
    if first <= thr {
        return Some(times[0]);
    }
    (1..dp.len()).find(|&i| dp[i] <= thr).map(|i| {
        let (t_a, t_b) = (times[i - 1], times[i]);
        let (d_a, d_b) = (dp[i - 1], dp[i]);
        t_a + (d_a - thr) / (d_a - d_b) * (t_b - t_a)
    })
}

/// `D_p` of every snapshot against reference mass `mass`, using the trajectory's own `p`.
pub fn dp_series(traj: &Trajectory, mass: f64) -> Vec<f64> {
    traj.snapshots
        .iter()
        .map(|s| s.diagnostics.lp_integral.ln() / traj.p - mass.ln())
        .collect()
}

/// Regime-change time of a trajectory (its diagnostics exponent is used).
pub fn detect_t0(traj: &Trajectory, mass: f64) -> Option<f64> {
    t0_from_series(&traj.times(), &dp_series(traj, mass), traj.p)
}

/// Envelope with the measured phase boundary of `traj`, `D_p(t_0)` interpolated like `t_0`.
pub fn trajectory_t0_mode(traj: &Trajectory, mass: f64) -> Option<T0Mode> {
    let times = traj.times();
    let dps = dp_series(traj, mass);
    let t0 = t0_from_series(&times, &dps, traj.p)?;
    let thr = (traj.p - 1.0) / traj.p;
    let dp_at_t0 = if t0 == times[0] { dps[0] } else { thr };
    Some(T0Mode::FromTrajectory { t0, dp_at_t0 })
}

/// Constant `k` in `d/dt int mu^p dpi = -k * E(mu^{(p+beta)/2})`.
pub fn dissipation_constant(p: f64, beta: f64, normalization: Normalization) -> f64 {
    normalization.coefficient(beta) * (1.0 + beta) * 4.0 * p * (p - 1.0) / (p + beta).powi(2)
}

/// Relative mismatch of the `L^p` dissipation identity at interior snapshot `index`.
///
/// The time derivative is a centred difference over neighbouring snapshots,
/// which must be uniformly spaced. When the energy term vanishes the
/// absolute derivative is returned instead.
pub fn dissipation_residual(traj: &Trajectory, index: usize, p: f64) -> Result<f64> {
    if traj.len() < 3 || index == 0 || index + 1 >= traj.len() {
        return Err(Error::Index {
            index,
            max: traj.len().saturating_sub(2),
        });
    }
    if p != traj.p {
        return Err(Error::param("p", "must match the trajectory's diagnostic exponent"));
    }
    let s = &traj.snapshots;
    let (t_a, t, t_b) = (s[index - 1].t(), s[index].t(), s[index + 1].t());
    if ((t_b - t) - (t - t_a)).abs() > 1e-9 * (t_b - t_a) {
        return Err(Error::param("trajectory", "snapshots around the index are not uniformly spaced"));
    }
    let lhs = (s[index + 1].diagnostics.lp_integral - s[index - 1].diagnostics.lp_integral) / (t_b - t_a);
    let k = dissipation_constant(p, traj.config.beta, traj.config.normalization);
    let rhs = k * s[index].diagnostics.energy;
    let mismatch = (lhs + rhs).abs();
    Ok(if rhs > 0.0 { mismatch / rhs } else { mismatch })
}

/// Cells below this density are left out of the Aronson–Bénilan check.
pub const VACUUM_CUTOFF: f64 = 1e-8;

/// Constant in `L nu >= -c_AB / (beta t)` for the given normalization.
pub fn aronson_benilan_constant(beta: f64, normalization: Normalization) -> f64 {
    1.0 / normalization.coefficient(beta)
}

/// `min_i (L_h nu)_i + c_AB / (beta t)` over interior non-vacuum cells.
///
/// Nonnegative means the one-sided bound holds. Returns `+inf` when no cell
/// qualifies.
pub fn aronson_benilan_margin(
    field: &DensityField,
    mesh: &WeightedMesh,
    beta: f64,
    t: f64,
    normalization: Normalization,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::param("t", "must be positive"));
    }
    if !(beta > 0.0) {
        return Err(Error::param("beta", "must be positive"));
    }
    mesh.check_field(&field.values)?;
    crate::mesh::validate_density(&field.values)?;
    let nu = pressure_values(&field.values, beta);
    let l_nu = apply_l(&nu, mesh, BoundaryCondition::ZeroFlux)?;
    let bound = aronson_benilan_constant(beta, normalization) / (beta * t);
    let n = field.len();
    Ok((1..n.saturating_sub(1))
        .filter(|&i| field.values[i] >= VACUUM_CUTOFF)
        .map(|i| l_nu[i] + bound)
        .fold(f64::INFINITY, f64::min))
}

/// Barrier `eps (R^2 - |x - x0|^2 + zeta) / (t + tau)` for the pressure on a ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    pub epsilon: f64,
    pub tau: f64,
    pub radius: f64,
    pub center: f64,
    pub zeta: f64,
    pub c: f64,
}

impl BarrierParams {
    /// `eps (R^2 - |x - x0|^2) / (s + tau)`, the lower bound the pressure must respect.
    pub fn lower_bound(&self, x: f64, s: f64) -> f64 {
        let d = x - self.center;
        self.epsilon * (self.radius * self.radius - d * d) / (s + self.tau)
    }
}

/// Number of sample points for the supremum over the ball.
const BALL_SAMPLES: usize = 10_000;

/// Picks `eps` so the barrier is a subsolution on the ball and `tau` so it starts below `c`.
pub fn barrier_select(c: f64, radius: f64, center: f64, zeta: f64, beta: f64, potential: &Potential) -> Result<BarrierParams> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("c", "must be positive"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::param("radius", "must be positive"));
    }
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::param("zeta", "must be positive"));
    }
    if !(beta > 0.0) {
        return Err(Error::param("beta", "must be positive"));
    }
    let mut sup = 0.0f64;
    for k in 0..BALL_SAMPLES {
        let x = center - radius + 2.0 * radius * k as f64 / (BALL_SAMPLES - 1) as f64;
        let dv = potential.derivative(x);
        if !dv.is_finite() {
            return Err(Error::NonFinitePotential { x });
        }
        // d = 1: 1 + beta * L(delta_eps) = 1 + beta eps (-2 + 2 V'(x)(x - x0))
        sup = sup.max((-2.0 + 2.0 * dv * (x - center)).abs());
    }
    let epsilon = (1.0 / (2.0 * beta * (sup + 1.0))).min(1.0);
    let tau = epsilon * (radius * radius + zeta) / c;
    Ok(BarrierParams {
        epsilon,
        tau,
        radius,
        center,
        zeta,
        c,
    })
}

fn ball_cells(mesh: &WeightedMesh, center: f64, radius: f64) -> Vec<usize> {
    (0..mesh.n_cells())
        .filter(|&i| (mesh.centers[i] - center).abs() < radius)
        .collect()
}

/// Measured inputs for [`barrier_select`]: `c = min nu(., 0)` over the ball and
/// `zeta = min nu` on the ball's boundary over all snapshots (linear interpolation).
pub fn measure_barrier_inputs(traj: &Trajectory, mesh: &WeightedMesh, radius: f64, center: f64) -> Result<(f64, f64)> {
    let beta = traj.config.beta;
    let cells = ball_cells(mesh, center, radius);
    if cells.is_empty() {
        return Err(Error::param("radius", "ball contains no cell centres"));
    }
    let nu0 = pressure_values(&traj.snapshots[0].field.values, beta);
    let c = cells.iter().map(|&i| nu0[i]).fold(f64::INFINITY, f64::min);
    let interp = |values: &[f64], x: f64| -> f64 {
        let xs = &mesh.centers;
        let n = xs.len();
        if x <= xs[0] {
            return values[0];
        }
        if x >= xs[n - 1] {
            return values[n - 1];
        }
        let k = (((x - xs[0]) / mesh.h).floor() as usize).min(n - 2);
        let w = (x - xs[k]) / mesh.h;
        (1.0 - w) * values[k] + w * values[k + 1]
    };
    let zeta = traj
        .snapshots
        .iter()
        .flat_map(|s| {
            let nu = pressure_values(&s.field.values, beta);
            [interp(&nu, center - radius), interp(&nu, center + radius)]
        })
        .fold(f64::INFINITY, f64::min);
    Ok((c, zeta))
}

/// `min` over snapshots and ball cells of `nu_i(t) - eps (R^2 - |x_i - x0|^2) / (s + tau)`.
///
/// `s` is the unit-normalization time of the snapshot.
pub fn barrier_margin(
    traj: &Trajectory,
    mesh: &WeightedMesh,
    beta: f64,
    params: &BarrierParams,
    normalization: Normalization,
) -> Result<f64> {
    let cells = ball_cells(mesh, params.center, params.radius);
    let first = traj.snapshots.first().ok_or(Error::Index { index: 0, max: 0 })?;
    mesh.check_field(&first.field.values)?;
    let nu0 = pressure_values(&first.field.values, beta);
    for &i in &cells {
        if nu0[i] < params.c {
            return Err(Error::BarrierPrecondition {
                cell: i,
                pressure: nu0[i],
                c: params.c,
            });
        }
    }
    let mut margin = f64::INFINITY;
    for snap in &traj.snapshots {
        let s = normalization.unit_time(snap.t(), beta);
        let nu = pressure_values(&snap.field.values, beta);
        for &i in &cells {
            margin = margin.min(nu[i] - params.lower_bound(mesh.centers[i], s));
        }
    }
    Ok(margin)
}

/// `h * sum |u_i - v_i| pi_i`.
pub fn l1_distance(u: &DensityField, v: &DensityField, mesh: &WeightedMesh) -> Result<f64> {
    mesh.check_field(&u.values)?;
    check_len(u.len(), v.len())?;
    Ok(mesh.h
        * u.values
            .iter()
            .zip(&v.values)
            .zip(&mesh.cell_weights)
            .map(|((a, b), w)| (a - b).abs() * w)
            .sum::<f64>())
}

/// Least-squares decay rate `-d/dt log(y)` over the given samples (all `y > 0`).
pub fn fitted_decay_rate(times: &[f64], values: &[f64]) -> Option<f64> {
    if times.len() < 2 || times.len() != values.len() || values.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let n = times.len() as f64;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mt = times.iter().sum::<f64>() / n;
    let ml = logs.iter().sum::<f64>() / n;
    let sxy: f64 = times.iter().zip(&logs).map(|(t, l)| (t - mt) * (l - ml)).sum();
    let sxx: f64 = times.iter().map(|t| (t - mt).powi(2)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}
