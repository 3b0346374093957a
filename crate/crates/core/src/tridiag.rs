//! Tridiagonal solvers and Sturm-sequence bisection.

/// Solves `lower_i x_{i-1} + diag_i x_i + upper_i x_{i+1} = rhs_i` in place of `rhs`.
///
/// `lower[0]` and `upper[n-1]` are ignored. No pivoting: the callers only
/// pass diagonally dominant or symmetric positive definite matrices.
/// Returns `false` if a zero pivot is met.
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut Vec<f64>) -> bool {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    scratch.clear();
    scratch.resize(n, 0.0);
    let c = scratch;

    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return false;
    }
    c[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return false;
        }
        c[i] = upper[i] / pivot;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    true
}

/// Gaussian elimination with partial pivoting for general tridiagonal systems
/// (the `gtsv` scheme). `sub[i]` couples row `i+1` to `x_i`, `sup[i]` row `i` to
/// `x_{i+1}`; both have `n - 1` entries. Returns `false` on an exactly singular pivot.
pub fn solve_pivoted(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) -> bool {
    let n = diag.len();
    debug_assert!(sub.len() + 1 == n && sup.len() + 1 == n && rhs.len() == n);
    if n == 1 {
        if diag[0] == 0.0 {
            return false;
        }
        rhs[0] /= diag[0];
        return true;
    }
    let mut dl = sub.to_vec();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    let mut du2 = vec![0.0; n];
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                return false;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            rhs[i + 1] -= f * rhs[i];
            dl[i] = 0.0;
        } else {
            // swap rows i and i+1
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            du[i] = tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            rhs.swap(i, i + 1);
            rhs[i + 1] -= f * rhs[i];
        }
    }
    if d[n - 1] == 0.0 {
        return false;
    }
    rhs[n - 1] /= d[n - 1];
    rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) / d[n - 2];
    for i in (0..n.saturating_sub(2)).rev() {
        rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - du2[i] * rhs[i + 2]) / d[i];
    }
    true
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix (`diag`, `off`).
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..diag.len() {
        let b2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
        d = diag[i] - x - if i > 0 { b2 / d } else { 0.0 };
        if d == 0.0 {
            d = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix by bisection.
pub fn bisect_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let n = diag.len();
    let radius = (0..n)
        .map(|i| {
            diag[i].abs()
                + if i > 0 { off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { off[i].abs() } else { 0.0 }
        })
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
