use proptest::prelude::*;

use pmelab::evolve::{run, run_dirichlet_cascade, Normalization, Scheme, SolverConfig, Trajectory};
use pmelab::mesh::{build_mesh, DensityField, Potential, WeightedMesh};
use pmelab::operators::{dirichlet_energy, psi, BoundaryCondition};
use pmelab::scenario::{l1_series, max_increase, min_gap};

/// `floor + a exp(-(x - c)^2 / (2 w^2))`.
fn bump(mesh: &WeightedMesh, floor: f64, a: f64, c: f64, w: f64) -> DensityField {
    let values = mesh
        .centers
        .iter()
        .map(|x| floor + a * (-(x - c).powi(2) / (2.0 * w * w)).exp())
        .collect();
    DensityField::new(values, 0.0).unwrap()
}

fn data() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.0..0.3f64, 0.2..3.0f64, -2.0..2.0f64, 0.2..1.0f64)
}

fn mesh(n: usize) -> WeightedMesh {
    build_mesh(Potential::gaussian(), 4.0, n).unwrap()
}

fn times(horizon: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|k| horizon * k as f64 / count as f64).collect()
}

fn go(d: &DensityField, m: &WeightedMesh, cfg: &SolverConfig, horizon: f64, p: f64) -> Trajectory {
    run(d, m, cfg, horizon, &times(horizon, 20), p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mass_is_conserved(n in 24usize..80, beta in 0.5..2.0f64, implicit in any::<bool>(), (f, a, c, w) in data()) {
        let m = mesh(n);
        let scheme = if implicit { Scheme::ImplicitEuler } else { Scheme::ExplicitEuler };
        let cfg = SolverConfig::new(beta).with_scheme(scheme);
        let traj = go(&bump(&m, f, a, c, w), &m, &cfg, 0.3, 2.0);
        prop_assert!(traj.max_relative_mass_drift() <= 1e-10);
    }

    #[test]
    fn l1_distance_never_grows(n in 24usize..80, beta in 0.5..2.0f64, x in data(), y in data()) {
        let m = mesh(n);
        let cfg = SolverConfig::new(beta);
        let a = go(&bump(&m, x.0, x.1, x.2, x.3), &m, &cfg, 0.3, 2.0);
        let b = go(&bump(&m, y.0, y.1, y.2, y.3), &m, &cfg, 0.3, 2.0);
        let d = l1_series(&a, &b, &m).unwrap();
        prop_assert!(max_increase(&d) <= 1e-8 + 10.0 * m.h * m.h, "{d:?}");
    }

    #[test]
    fn ordered_data_stay_ordered(n in 24usize..80, beta in 0.5..2.0f64, offset in 0.0..0.5f64, (f, a, c, w) in data()) {
        let m = mesh(n);
        let cfg = SolverConfig::new(beta);
        let lower = bump(&m, f, a, c, w);
        let upper = bump(&m, f + offset, a, c, w);
        let gap = min_gap(&go(&upper, &m, &cfg, 0.3, 2.0), &go(&lower, &m, &cfg, 0.3, 2.0));
        prop_assert!(gap >= -1e-8, "{gap}");
    }

    #[test]
    fn lp_norms_decrease(n in 24usize..80, beta in 0.5..2.0f64, p in 1.5..4.0f64, (f, a, c, w) in data()) {
        let m = mesh(n);
        let traj = go(&bump(&m, f, a, c, w), &m, &SolverConfig::new(beta), 0.3, p);
        for s in traj.snapshots.windows(2) {
            let (x, y) = (s[0].diagnostics.lp_integral, s[1].diagnostics.lp_integral);
            prop_assert!(y <= x * (1.0 + 1e-12), "{x} -> {y}");
        }
    }

    #[test]
    fn time_derivative_is_bounded(n in 24usize..64, beta in 0.5..2.0f64, t in 0.02..0.5f64, (f, a, c, w) in data()) {
        let m = mesh(n);
        let cfg = SolverConfig::new(beta).with_normalization(Normalization::Unit);
        let init = bump(&m, f, a, c, w);
        let dt = 1e-3 * t;
        let traj = run(&init, &m, &cfg, t + dt, &[t, t + dt], 2.0).unwrap();
        let (u, v) = (&traj.snapshots[1].field, &traj.snapshots[2].field);
        let rate = pmelab::analysis::l1_distance(u, v, &m).unwrap() / dt;
        let bound = 2.0 * traj.initial_mass / (beta * t) * 1.1;
        prop_assert!(rate <= bound, "{rate} > {bound}");
    }

    #[test]
    fn cascade_levels_are_ordered(n in 24usize..64, (f, a, c, w) in data()) {
        let m = mesh(n);
        let cfg = SolverConfig::new(1.0).with_bc(BoundaryCondition::Dirichlet(0.0));
        let levels = run_dirichlet_cascade(&bump(&m, f, a, c, w), &m, &cfg, 0.3, &times(0.3, 10), 2.0, 3).unwrap();
        for pair in levels.windows(2) {
            prop_assert!(min_gap(&pair[0], &pair[1]) >= -1e-8);
        }
    }
}

#[test]
fn entropy_identity_holds_under_refinement() {
    // c_eq = 1 and Phi(r) = r^{beta+2}/(beta+2): d/dt int Phi = -|grad mu^{1+beta}|^2
    let beta = 1.0;
    let residual = |n: usize| {
        let m = mesh(n);
        let cfg = SolverConfig::new(beta).with_normalization(Normalization::Unit);
        let (t, dt) = (0.5, 1e-4);
        let traj = run(&bump(&m, 0.1, 1.0, 0.5, 0.5), &m, &cfg, t + dt, &[t - dt, t, t + dt], 2.0).unwrap();
        let phi = |s: usize| {
            m.integrate_with(&traj.snapshots[s].field.values, |r| r.powf(beta + 2.0) / (beta + 2.0))
        };
        let lhs = (phi(3) - phi(1)) / (2.0 * dt);
        let rhs = dirichlet_energy(&psi(&traj.snapshots[2].field, beta).unwrap(), &m).unwrap();
        (lhs + rhs).abs() / rhs
    };
    let (coarse, fine) = (residual(64), residual(128));
    assert!(coarse < 1e-4, "{coarse}");
    assert!(fine < 1e-4, "{fine}");
}

#[test]
fn explicit_and_implicit_runs_agree() {
    let m = mesh(64);
    let init = bump(&m, 0.05, 1.0, 0.3, 0.4);
    let explicit = go(&init, &m, &SolverConfig::new(1.0), 0.5, 2.0);
    let mut implicit_cfg = SolverConfig::new(1.0).with_scheme(Scheme::ImplicitEuler);
    implicit_cfg.dt_max = 1e-4;
    let implicit = go(&init, &m, &implicit_cfg, 0.5, 2.0);
    let d = l1_series(&explicit, &implicit, &m).unwrap();
    assert!(d.iter().all(|&x| x < 1e-3), "{d:?}");
}
