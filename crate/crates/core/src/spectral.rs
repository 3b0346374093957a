//! Spectral gap of `-L_h` under zero-flux boundaries, i.e. the discrete
//! Poincaré constant of the mesh's Gibbs measure.
//!
//! With `D = diag(pi_i)` the matrix `S = D^{1/2} (-L_h) D^{-1/2}` is symmetric
//! tridiagonal and its kernel is spanned by `D^{1/2} 1`. We project that vector
//! out of every iterate and run shifted inverse iteration, with the shift taken
//! from a Sturm-sequence bisection for the second smallest eigenvalue of `S`.

use crate::error::{Error, Result};
use crate::mesh::WeightedMesh;
use crate::operators::{apply_l, BoundaryCondition};
use crate::tridiag;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    /// Smallest nonzero eigenvalue of `-L_h`.
    pub lambda: f64,
    /// Eigenvector in the original variables: zero `pi`-mean, unit `L2(pi)` norm.
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
    /// `||(-L_h) v - lambda v||_{L2(pi)}`.
    pub residual: f64,
}

pub const MAX_ITERATIONS: usize = 10_000;
const RESIDUAL_TOL: f64 = 1e-10;

/// Symmetrized operator `S` as (diagonal, off-diagonal) with `off[k]` coupling cells `k` and `k+1`.
pub fn symmetrized(mesh: &WeightedMesh) -> (Vec<f64>, Vec<f64>) {
    let n = mesh.n_cells();
    let inv_h2 = 1.0 / (mesh.h * mesh.h);
    let pi = &mesh.cell_weights;
    let pf = &mesh.face_weights;
    let diag = (0..n)
        .map(|i| {
            let lo = if i > 0 { pf[i] } else { 0.0 };
            let hi = if i + 1 < n { pf[i + 1] } else { 0.0 };
            (lo + hi) * inv_h2 / pi[i]
        })
        .collect();
    let off = (0..n - 1)
        .map(|k| -pf[k + 1] * inv_h2 / (pi[k] * pi[k + 1]).sqrt())
        .collect();
    (diag, off)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_out(w: &mut [f64], q: &[f64]) {
    let c = dot(w, q);
    for (wi, qi) in w.iter_mut().zip(q) {
        *wi -= c * qi;
    }
}

fn normalize(w: &mut [f64]) -> f64 {
    let norm = dot(w, w).sqrt();
    for wi in w.iter_mut() {
        *wi /= norm;
    }
    norm
}

fn sym_apply(diag: &[f64], off: &[f64], w: &[f64], out: &mut [f64]) {
    let n = w.len();
    for i in 0..n {
        let mut v = diag[i] * w[i];
        if i > 0 {
            v += off[i - 1] * w[i - 1];
        }
        if i + 1 < n {
            v += off[i] * w[i + 1];
        }
        out[i] = v;
    }
}

/// Estimates the discrete Poincaré constant of `mesh`.
pub fn estimate_poincare(mesh: &WeightedMesh) -> Result<SpectralResult> {
    let n = mesh.n_cells();
    if n < 3 {
        return Err(Error::param("n_cells", "spectral estimate needs at least 3 cells"));
    }
    let (diag, off) = symmetrized(mesh);
    let norm_s = (0..n)
        .map(|i| {
            diag[i].abs()
                + if i > 0 { off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { off[i].abs() } else { 0.0 }
        })
        .fold(0.0, f64::max);

    let mut kernel: Vec<f64> = mesh.cell_weights.iter().map(|w| w.sqrt()).collect();
    normalize(&mut kernel);

    // Sturm bisection places the shift on the target eigenvalue, so the
    // iteration converges in a few steps even when the next eigenvalue is close.
    let mut shift = tridiag::bisect_eigenvalue(&diag, &off, 1);

    // deterministic start with components on odd and even modes
    let mut w: Vec<f64> = mesh
        .centers
        .iter()
        .map(|&x| x / mesh.half_width + 0.25 * (3.7 * x / mesh.half_width + 0.5).cos())
        .collect();
    project_out(&mut w, &kernel);
    normalize(&mut w);

    let mut sw = vec![0.0; n];
    let mut shifted = vec![0.0; n];
    let mut rayleigh = f64::NAN;
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    for iteration in 1..=MAX_ITERATIONS {
        for (s, d) in shifted.iter_mut().zip(&diag) {
            *s = d - shift;
        }
        let previous = w.clone();
        if !tridiag::solve_pivoted(&off, &shifted, &off, &mut w) {
            // shift hit an eigenvalue exactly
            w = previous;
            shift -= f64::EPSILON * norm_s;
            continue;
        }
        project_out(&mut w, &kernel);
        normalize(&mut w);

        sym_apply(&diag, &off, &w, &mut sw);
        rayleigh = dot(&w, &sw);
        // equals the L2(pi) residual of the back-transformed eigenvector
        let residual = sw
            .iter()
            .zip(&w)
            .map(|(s, v)| (s - rayleigh * v).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual < 0.5 * best {
            best = residual;
            stalled = 0;
        } else {
            stalled += 1;
        }
        // keep iterating while the residual still improves, stop at rounding level
        if residual <= RESIDUAL_TOL && (stalled >= 2 || residual <= 1e-14 * norm_s) {
            return Ok(finish(mesh, &w, rayleigh, iteration));
        }
    }
    Err(Error::Eigen {
        iterations: MAX_ITERATIONS,
        rayleigh,
    })
}

fn finish(mesh: &WeightedMesh, w: &[f64], lambda: f64, iterations: usize) -> SpectralResult {
    // back to original variables v = D^{-1/2} w, scaled to unit L2(pi) norm
    let mut v: Vec<f64> = w
        .iter()
        .zip(&mesh.cell_weights)
        .map(|(wi, pi)| wi / pi.sqrt())
        .collect();
    let norm = mesh.integrate_with(&v, |x| x * x).sqrt();
    for vi in v.iter_mut() {
        *vi /= norm;
    }
    let lv = apply_l(&v, mesh, BoundaryCondition::ZeroFlux).expect("lengths match");
    let r: Vec<f64> = lv.iter().zip(&v).map(|(l, x)| -l - lambda * x).collect();
    let residual = mesh.integrate_with(&r, |x| x * x).sqrt();
    SpectralResult {
        lambda,
        eigenvector: v,
        iterations,
        residual,
    }
}
