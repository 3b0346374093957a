//! Numerical laboratory for the weighted porous-medium equation
//!
//! ```text
//! d/dt mu = c_eq * (mu^{1+beta})'' - c_eq * V' * (mu^{1+beta})'
//! ```
//!
//! on a truncated interval carrying the Gibbs measure `pi = e^{-V}`. The crate
//! provides a conservative finite-volume discretization, a spectral-gap
//! (Poincaré constant) estimator for the discrete measure, and executable
//! checks of the quantitative properties of the flow: mass conservation, L1
//! contraction, comparison, the `L^p` dissipation identity, the two-phase
//! `L1 -> L^p` smoothing envelope, Aronson–Bénilan and barrier lower bounds.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod evolve;
pub mod mesh;
pub mod operators;
pub mod scenario;
pub mod spectral;
mod tridiag;

pub use error::{Error, Result};
pub use evolve::{Normalization, Scheme, SolverConfig, Trajectory};
pub use mesh::{build_mesh, DensityField, Potential, PotentialKind, WeightedMesh};
pub use operators::BoundaryCondition;
