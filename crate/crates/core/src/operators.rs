//! The weighted operator `L0 u = pi^{-1} (pi u')'`, the nonlinearity
//! `Psi(mu) = mu^{1+beta}`, the pressure transform and the Dirichlet energy.
//!
//! `L0` carries no `(1+beta)^{-1}` prefactor; the evolution coefficient lives
//! in [`crate::evolve::Normalization`].

use crate::error::{check_len, Error, Result};
use crate::mesh::{DensityField, WeightedMesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    ZeroFlux,
    /// Wall value `g >= 0`, imposed through the ghost value `2g - u_boundary`.
    Dirichlet(f64),
}

impl BoundaryCondition {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BoundaryCondition::Dirichlet(g) if !(g >= 0.0 && g.is_finite()) => Err(Error::param(
                "dirichlet_value",
                "must be finite and nonnegative",
            )),
            _ => Ok(()),
        }
    }

    /// Boundary condition satisfied by `f(u)` when `u` satisfies `self`.
    pub fn mapped(&self, f: impl Fn(f64) -> f64) -> BoundaryCondition {
        match *self {
            BoundaryCondition::ZeroFlux => BoundaryCondition::ZeroFlux,
            BoundaryCondition::Dirichlet(g) => BoundaryCondition::Dirichlet(f(g)),
        }
    }
}

/// Face fluxes `F_{i+1/2} = pi_{i+1/2} (u_{i+1} - u_i)`, `n + 1` entries.
pub fn face_fluxes(u: &[f64], mesh: &WeightedMesh, bc: BoundaryCondition) -> Vec<f64> {
    let n = u.len();
    let pf = &mesh.face_weights;
    let mut flux = vec![0.0; n + 1];
    for k in 1..n {
        flux[k] = pf[k] * (u[k] - u[k - 1]);
    }
    if let BoundaryCondition::Dirichlet(g) = bc {
        // ghost value 2g - u_b puts g on the wall
        flux[0] = 2.0 * pf[0] * (u[0] - g);
        flux[n] = 2.0 * pf[n] * (g - u[n - 1]);
    }
    flux
}

/// `(L_h u)_i = (F_{i+1/2} - F_{i-1/2}) / (pi_i h^2)`.
pub fn apply_l(u: &[f64], mesh: &WeightedMesh, bc: BoundaryCondition) -> Result<Vec<f64>> {
    check_len(mesh.n_cells(), u.len())?;
    let mut out = vec![0.0; u.len()];
    apply_l_into(u, mesh, bc, &mut out);
    Ok(out)
}

/// Allocation-free kernel behind [`apply_l`]; lengths must already match.
pub(crate) fn apply_l_into(u: &[f64], mesh: &WeightedMesh, bc: BoundaryCondition, out: &mut [f64]) {
    let n = u.len();
    let pf = &mesh.face_weights;
    let inv_h2 = 1.0 / (mesh.h * mesh.h);
    let (left, right) = match bc {
        BoundaryCondition::ZeroFlux => (0.0, 0.0),
        BoundaryCondition::Dirichlet(g) => (2.0 * pf[0] * (u[0] - g), 2.0 * pf[n] * (g - u[n - 1])),
    };
    let mut f_lo = left;
    for i in 0..n {
        let f_hi = if i + 1 < n {
            pf[i + 1] * (u[i + 1] - u[i])
        } else {
            right
        };
        out[i] = (f_hi - f_lo) * inv_h2 / mesh.cell_weights[i];
        f_lo = f_hi;
    }
}

/// Tridiagonal coefficients of `L_h`: `(L u)_i = lower_i u_{i-1} + diag_i u_i + upper_i u_{i+1} + source_i`.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub source: Vec<f64>,
}

pub fn stencil(mesh: &WeightedMesh, bc: BoundaryCondition) -> Stencil {
    let n = mesh.n_cells();
    let pf = &mesh.face_weights;
    let inv_h2 = 1.0 / (mesh.h * mesh.h);
    let mut s = Stencil {
        lower: vec![0.0; n],
        diag: vec![0.0; n],
        upper: vec![0.0; n],
        source: vec![0.0; n],
    };
    for i in 0..n {
        let scale = inv_h2 / mesh.cell_weights[i];
        if i > 0 {
            s.lower[i] = pf[i] * scale;
        }
        if i + 1 < n {
            s.upper[i] = pf[i + 1] * scale;
        }
        s.diag[i] = -(s.lower[i] + s.upper[i]);
    }
    if let BoundaryCondition::Dirichlet(g) = bc {
        let l = 2.0 * pf[0] * inv_h2 / mesh.cell_weights[0];
        let r = 2.0 * pf[n] * inv_h2 / mesh.cell_weights[n - 1];
        s.diag[0] -= l;
        s.source[0] += l * g;
        s.diag[n - 1] -= r;
        s.source[n - 1] += r * g;
    }
    s
}

/// `mu^{1+beta}` with an exact fast path for integer exponents.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Power {
    exponent: f64,
    integer: Option<i32>,
}

impl Power {
    pub(crate) fn new(exponent: f64) -> Self {
        let integer = (exponent.fract() == 0.0 && exponent.abs() <= 16.0).then_some(exponent as i32);
        Power { exponent, integer }
    }

    #[inline]
    pub(crate) fn eval(&self, x: f64) -> f64 {
        match self.integer {
            Some(0) => 1.0,
            Some(1) => x,
            Some(2) => x * x,
            Some(k) => x.powi(k),
            None => {
                if x == 0.0 {
                    0.0
                } else {
                    x.powf(self.exponent)
                }
            }
        }
    }
}

fn check_nonnegative(values: &[f64]) -> Result<()> {
    crate::mesh::validate_density(values)
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::param("beta", "must be positive"))
    }
}

/// `Psi(mu) = mu^{1+beta}` elementwise.
pub fn psi(field: &DensityField, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    check_nonnegative(&field.values)?;
    let pow = Power::new(1.0 + beta);
    Ok(field.values.iter().map(|&m| pow.eval(m)).collect())
}

/// Pressure `nu = (beta+1) mu^beta / beta` elementwise.
pub fn pressure(field: &DensityField, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    check_nonnegative(&field.values)?;
    Ok(pressure_values(&field.values, beta))
}

pub(crate) fn pressure_values(values: &[f64], beta: f64) -> Vec<f64> {
    let pow = Power::new(beta);
    let k = (beta + 1.0) / beta;
    values.iter().map(|&m| k * pow.eval(m)).collect()
}

/// Bilinear Dirichlet form `h * sum_{interior faces} pi_{i+1/2} (du/h)(dv/h)`.
pub fn dirichlet_form(u: &[f64], v: &[f64], mesh: &WeightedMesh) -> Result<f64> {
    check_len(mesh.n_cells(), u.len())?;
    check_len(mesh.n_cells(), v.len())?;
    let pf = &mesh.face_weights;
    let s: f64 = (1..u.len())
        .map(|k| pf[k] * (u[k] - u[k - 1]) * (v[k] - v[k - 1]))
        .sum();
    Ok(s / mesh.h)
}

/// `h * sum_{interior faces} pi_{i+1/2} ((u_{i+1} - u_i)/h)^2`.
pub fn dirichlet_energy(u: &[f64], mesh: &WeightedMesh) -> Result<f64> {
    dirichlet_form(u, u, mesh)
}
