//! Run configuration: a strict TOML schema, initial-data builders and the
//! built-in preset catalog.
//!
//! ```toml
//! name = "demo"
//!
//! [potential]
//! kind = "gaussian"        # gaussian | flat | smoothed_power | double_well
//! params = []
//!
//! [mesh]
//! half_width = 8.0
//! cells = 512
//!
//! [model]
//! beta = 1.0
//! p = 2.0
//! normalization = "inverse_one_plus_beta"   # or "unit"
//!
//! [solver]
//! scheme = "explicit"      # or "implicit"
//! boundary = "zero_flux"   # or "dirichlet" with boundary_value
//!
//! [initial]
//! kind = "gaussian_bump"   # constant | gaussian_bump | indicator | peaked
//! center = 1.5
//! width = 0.25
//! mass = 1.0
//!
//! [time]
//! horizon = 10.0
//! output_count = 101       # or output_times = [0.0, 0.1, 1.0, 10.0]
//!
//! [checks]
//! run = ["mass", "envelope"]
//! ```
//!
//! Every table and key is optional; unknown keys are rejected.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::evolve::{Normalization, Scheme, SolverConfig};
use crate::mesh::{build_mesh, DensityField, Potential, WeightedMesh};
use crate::operators::BoundaryCondition;

/// Bound checks a scenario can run after the main integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Mass,
    Contraction,
    Comparison,
    Envelope,
    Dissipation,
    Ab,
    Barrier,
    Scaling,
    Cascade,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::Mass,
        Check::Contraction,
        Check::Comparison,
        Check::Envelope,
        Check::Dissipation,
        Check::Ab,
        Check::Barrier,
        Check::Scaling,
        Check::Cascade,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Mass => "mass",
            Check::Contraction => "contraction",
            Check::Comparison => "comparison",
            Check::Envelope => "envelope",
            Check::Dissipation => "dissipation",
            Check::Ab => "ab",
            Check::Barrier => "barrier",
            Check::Scaling => "scaling",
            Check::Cascade => "cascade",
        }
    }

    /// Checks whose statement assumes a conservative (zero-flux) run.
    fn needs_zero_flux(self) -> bool {
        matches!(self, Check::Mass | Check::Envelope | Check::Dissipation)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::config("checks.run", format!("unknown check `{s}`")))
    }
}

/// Initial datum, renormalized on the mesh to the requested `L1(pi)` mass.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `mu = mass`.
    Constant {
        #[serde(default = "one")]
        mass: f64,
    },
    /// `floor + A exp(-(x - center)^2 / (2 width^2))` with `A` fixed by the mass.
    GaussianBump {
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default = "one")]
        mass: f64,
        #[serde(default)]
        floor: f64,
    },
    /// Constant on `interval`, zero elsewhere.
    Indicator {
        interval: [f64; 2],
        #[serde(default = "one")]
        mass: f64,
    },
    /// Narrow bump of width `1 / sharpness`; large `L^p` norms at fixed mass.
    Peaked {
        #[serde(default = "one")]
        mass: f64,
        sharpness: f64,
        #[serde(default)]
        center: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::GaussianBump {
            center: 0.0,
            width: 1.0,
            mass: 1.0,
            floor: 0.0,
        }
    }
}

impl InitialData {
    pub fn mass(&self) -> f64 {
        match *self {
            InitialData::Constant { mass }
            | InitialData::GaussianBump { mass, .. }
            | InitialData::Indicator { mass, .. }
            | InitialData::Peaked { mass, .. } => mass,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mass = self.mass();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::config("initial.mass", "must be positive"));
        }
        match *self {
            InitialData::Constant { .. } => Ok(()),
            InitialData::GaussianBump { center, width, floor, mass } => {
                if !center.is_finite() {
                    return Err(Error::config("initial.center", "must be finite"));
                }
                if !(width > 0.0 && width.is_finite()) {
                    return Err(Error::config("initial.width", "must be positive"));
                }
                if !(floor >= 0.0 && floor < mass) {
                    return Err(Error::config("initial.floor", "must lie in [0, mass)"));
                }
                Ok(())
            }
            InitialData::Indicator { interval: [a, b], .. } => {
                if !(a < b && a.is_finite() && b.is_finite()) {
                    return Err(Error::config("initial.interval", "need a finite interval [a, b] with a < b"));
                }
                Ok(())
            }
            InitialData::Peaked { sharpness, center, .. } => {
                if !(sharpness > 0.0 && sharpness.is_finite()) {
                    return Err(Error::config("initial.sharpness", "must be positive"));
                }
                if !center.is_finite() {
                    return Err(Error::config("initial.center", "must be finite"));
                }
                Ok(())
            }
        }
    }

    /// Cell values on `mesh` with `h sum mu_i pi_i = mass`.
    pub fn build(&self, mesh: &WeightedMesh) -> Result<DensityField> {
        self.validate()?;
        let gauss = |center: f64, width: f64| -> Vec<f64> {
            mesh.centers
                .iter()
                .map(|x| (-(x - center).powi(2) / (2.0 * width * width)).exp())
                .collect()
        };
        let (profile, floor) = match *self {
            InitialData::Constant { mass } => return DensityField::constant(mass, mesh.n_cells()),
            InitialData::GaussianBump { center, width, floor, .. } => (gauss(center, width), floor),
            InitialData::Peaked { sharpness, center, .. } => (gauss(center, 1.0 / sharpness), 0.0),
            InitialData::Indicator { interval: [a, b], .. } => {
                let v = mesh
                    .centers
                    .iter()
                    .map(|&x| if x >= a && x <= b { 1.0 } else { 0.0 })
                    .collect();
                (v, 0.0)
            }
        };
        let raw = mesh.integrate(&profile);
        if !(raw > 0.0) {
            return Err(Error::config(
                "initial",
                "profile has no mass on the mesh (outside the domain or narrower than a cell)",
            ));
        }
        let scale = (self.mass() - floor) / raw;
        let values = profile.iter().map(|v| floor + scale * v).collect();
        DensityField::new(values, 0.0)
    }
}

/// Parameters of the auxiliary runs behind the checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSettings {
    pub run: Vec<Check>,
    /// Seed for the randomized Poincaré check.
    pub seed: u64,
    /// Second datum for the L1 contraction check.
    pub partner: InitialData,
    /// `c` in the comparison pair `(sigma + c, sigma)`.
    pub comparison_offset: f64,
    /// `eta` of the scaling check.
    pub scaling_eta: f64,
    pub cascade_levels: usize,
    pub barrier_center: f64,
    pub barrier_radius: f64,
    /// Envelope, dissipation and Aronson–Bénilan checks start here (the bounds blow up at `t = 0`).
    pub window_start: f64,
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings {
            run: vec![Check::Mass, Check::Envelope],
            seed: 0,
            partner: InitialData::GaussianBump {
                center: -1.0,
                width: 0.5,
                mass: 1.0,
                floor: 0.0,
            },
            comparison_offset: 0.1,
            scaling_eta: 2.0,
            cascade_levels: 4,
            barrier_center: 0.0,
            barrier_radius: 1.0,
            window_start: 0.05,
        }
    }
}

/// A validated scenario description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub potential: Potential,
    pub half_width: f64,
    pub cells: usize,
    pub p: f64,
    /// Carries `beta`, the normalization, the scheme and the boundary condition.
    pub solver: SolverConfig,
    pub initial: InitialData,
    pub horizon: f64,
    pub output_times: Vec<f64>,
    pub checks: CheckSettings,
}

impl RunConfig {
    pub fn beta(&self) -> f64 {
        self.solver.beta
    }

    pub fn mesh(&self) -> Result<WeightedMesh> {
        build_mesh(self.potential, self.half_width, self.cells)
    }

    pub fn has_check(&self, check: Check) -> bool {
        self.checks.run.contains(&check)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    #[serde(default)]
    potential: RawPotential,
    #[serde(default)]
    mesh: RawMesh,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    initial: Option<InitialData>,
    #[serde(default)]
    time: RawTime,
    #[serde(default)]
    checks: RawChecks,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    #[serde(default = "default_potential")]
    kind: String,
    #[serde(default)]
    params: Vec<f64>,
    #[serde(default)]
    offset: f64,
}

fn default_potential() -> String {
    "gaussian".into()
}

impl Default for RawPotential {
    fn default() -> Self {
        RawPotential {
            kind: default_potential(),
            params: Vec::new(),
            offset: 0.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    #[serde(default = "default_half_width")]
    half_width: f64,
    #[serde(default = "default_cells")]
    cells: usize,
}

fn default_half_width() -> f64 {
    8.0
}

fn default_cells() -> usize {
    512
}

impl Default for RawMesh {
    fn default() -> Self {
        RawMesh {
            half_width: default_half_width(),
            cells: default_cells(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawNormalization {
    Unit,
    InverseOnePlusBeta,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(default = "one")]
    beta: f64,
    #[serde(default = "default_p")]
    p: f64,
    #[serde(default = "default_normalization")]
    normalization: RawNormalization,
}

fn default_p() -> f64 {
    2.0
}

fn default_normalization() -> RawNormalization {
    RawNormalization::InverseOnePlusBeta
}

impl Default for RawModel {
    fn default() -> Self {
        RawModel {
            beta: 1.0,
            p: default_p(),
            normalization: default_normalization(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawScheme {
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawBoundary {
    ZeroFlux,
    Dirichlet,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(default = "default_scheme")]
    scheme: RawScheme,
    cfl_safety: Option<f64>,
    dt_max: Option<f64>,
    newton_tol: Option<f64>,
    newton_max_iter: Option<usize>,
    #[serde(default = "default_boundary")]
    boundary: RawBoundary,
    boundary_value: Option<f64>,
}

fn default_scheme() -> RawScheme {
    RawScheme::Explicit
}

fn default_boundary() -> RawBoundary {
    RawBoundary::ZeroFlux
}

impl Default for RawSolver {
    fn default() -> Self {
        RawSolver {
            scheme: default_scheme(),
            cfl_safety: None,
            dt_max: None,
            newton_tol: None,
            newton_max_iter: None,
            boundary: default_boundary(),
            boundary_value: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    #[serde(default = "default_horizon")]
    horizon: f64,
    output_count: Option<usize>,
    output_times: Option<Vec<f64>>,
}

fn default_horizon() -> f64 {
    10.0
}

impl Default for RawTime {
    fn default() -> Self {
        RawTime {
            horizon: default_horizon(),
            output_count: None,
            output_times: None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChecks {
    run: Option<Vec<String>>,
    seed: Option<u64>,
    partner: Option<InitialData>,
    comparison_offset: Option<f64>,
    scaling_eta: Option<f64>,
    cascade_levels: Option<usize>,
    barrier_center: Option<f64>,
    barrier_radius: Option<f64>,
    window_start: Option<f64>,
}

const DEFAULT_OUTPUT_COUNT: usize = 101;

fn positive(path: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(path, format!("must be positive and finite, got {v}")))
    }
}

/// Parses and validates a TOML scenario document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let path = e.span().map(|s| format!("bytes {}..{}", s.start, s.end)).unwrap_or_default();
        Error::config(path, e.message().to_string())
    })?;
    from_raw(raw)
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    parse_config(&text)
}

fn from_raw(raw: RawConfig) -> Result<RunConfig> {
    let potential = Potential::from_spec(&raw.potential.kind, &raw.potential.params)
        .map_err(|e| Error::config("potential", e.to_string()))?
        .with_offset(raw.potential.offset);
    potential.validate().map_err(|e| Error::config("potential.offset", e.to_string()))?;

    let half_width = positive("mesh.half_width", raw.mesh.half_width)?;
    if raw.mesh.cells < 3 {
        return Err(Error::config("mesh.cells", "need at least 3 cells"));
    }

    let RawModel { beta, p, normalization } = raw.model;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::config("model.beta", "must be positive"));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::config("model.p", "must exceed 1"));
    }
    if p + beta < 2.0 {
        return Err(Error::config(
            "model.p",
            format!("the L1-Lp smoothing estimate requires p+β ≥ 2 (got p+β = {})", p + beta),
        ));
    }

    let mut solver = SolverConfig::new(beta);
    solver.normalization = match normalization {
        RawNormalization::Unit => Normalization::Unit,
        RawNormalization::InverseOnePlusBeta => Normalization::InverseOnePlusBeta,
    };
    solver.scheme = match raw.solver.scheme {
        RawScheme::Explicit => Scheme::ExplicitEuler,
        RawScheme::Implicit => Scheme::ImplicitEuler,
    };
    if let Some(v) = raw.solver.cfl_safety {
        solver.cfl_safety = positive("solver.cfl_safety", v)?;
    }
    if let Some(v) = raw.solver.dt_max {
        solver.dt_max = positive("solver.dt_max", v)?;
    }
    if let Some(v) = raw.solver.newton_tol {
        solver.newton_tol = positive("solver.newton_tol", v)?;
    }
    if let Some(v) = raw.solver.newton_max_iter {
        if v == 0 {
            return Err(Error::config("solver.newton_max_iter", "must be at least 1"));
        }
        solver.newton_max_iter = v;
    }
    solver.bc = match (raw.solver.boundary, raw.solver.boundary_value) {
        (RawBoundary::ZeroFlux, None) => BoundaryCondition::ZeroFlux,
        (RawBoundary::ZeroFlux, Some(_)) => {
            return Err(Error::config("solver.boundary_value", "only meaningful with boundary = \"dirichlet\""))
        }
        (RawBoundary::Dirichlet, Some(g)) if g >= 0.0 && g.is_finite() => BoundaryCondition::Dirichlet(g),
        (RawBoundary::Dirichlet, _) => {
            return Err(Error::config("solver.boundary_value", "dirichlet needs a finite value >= 0"))
        }
    };

    let initial = raw.initial.unwrap_or_default();
    initial.validate()?;

    let horizon = positive("time.horizon", raw.time.horizon)?;
    let output_times = match (raw.time.output_count, raw.time.output_times) {
        (Some(_), Some(_)) => {
            return Err(Error::config("time", "give either output_count or output_times, not both"))
        }
        (None, Some(times)) => {
            if times.is_empty() {
                return Err(Error::config("time.output_times", "must not be empty"));
            }
            for w in times.windows(2) {
                if !(w[0] < w[1]) {
                    return Err(Error::config("time.output_times", "must be strictly increasing"));
                }
            }
            if !(times[0] >= 0.0) || times[times.len() - 1] > horizon {
                return Err(Error::config("time.output_times", format!("must lie in [0, {horizon}]")));
            }
            times
        }
        (count, None) => {
            let count = count.unwrap_or(DEFAULT_OUTPUT_COUNT);
            if count < 2 {
                return Err(Error::config("time.output_count", "need at least 2 output times"));
            }
            (0..count)
                .map(|k| horizon * k as f64 / (count - 1) as f64)
                .collect()
        }
    };

    let defaults = CheckSettings::default();
    let mut run = match raw.checks.run {
        Some(names) => names.iter().map(|s| s.parse()).collect::<Result<Vec<Check>>>()?,
        None => defaults.run.clone(),
    };
    run.sort();
    run.dedup();
    if matches!(solver.bc, BoundaryCondition::Dirichlet(_)) {
        if let Some(c) = run.iter().find(|c| c.needs_zero_flux()) {
            return Err(Error::config(
                "checks.run",
                format!("check `{c}` assumes a conservative run; use boundary = \"zero_flux\""),
            ));
        }
    }
    let partner = raw.checks.partner.unwrap_or(defaults.partner);
    partner.validate().map_err(|e| Error::config("checks.partner", e.to_string()))?;
    let cascade_levels = raw.checks.cascade_levels.unwrap_or(defaults.cascade_levels);
    if cascade_levels < 2 {
        return Err(Error::config("checks.cascade_levels", "need at least 2 levels"));
    }
    let checks = CheckSettings {
        run,
        seed: raw.checks.seed.unwrap_or(defaults.seed),
        partner,
        comparison_offset: positive(
            "checks.comparison_offset",
            raw.checks.comparison_offset.unwrap_or(defaults.comparison_offset),
        )?,
        scaling_eta: positive("checks.scaling_eta", raw.checks.scaling_eta.unwrap_or(defaults.scaling_eta))?,
        cascade_levels,
        barrier_center: raw.checks.barrier_center.unwrap_or(defaults.barrier_center),
        barrier_radius: positive(
            "checks.barrier_radius",
            raw.checks.barrier_radius.unwrap_or(defaults.barrier_radius),
        )?,
        window_start: positive("checks.window_start", raw.checks.window_start.unwrap_or(defaults.window_start))?,
    };
    if !checks.barrier_center.is_finite() || checks.barrier_center.abs() + checks.barrier_radius > half_width {
        return Err(Error::config("checks.barrier_center", "barrier ball must lie inside the domain"));
    }

    Ok(RunConfig {
        name: raw.name.unwrap_or_else(|| "scenario".into()),
        potential,
        half_width,
        cells: raw.mesh.cells,
        p,
        solver,
        initial,
        horizon,
        output_times,
        checks,
    })
}

/// A named, built-in scenario.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub toml: &'static str,
}

impl Preset {
    pub fn config(&self) -> RunConfig {
        parse_config(self.toml).expect("built-in presets are valid")
    }
}

const PRESETS: &[Preset] = &[
    Preset {
        name: "gaussian_reference",
        description: "Gaussian potential, off-centre bump of unit mass, beta = 1, p = 2, T = 20",
        toml: r#"
name = "gaussian_reference"
[potential]
kind = "gaussian"
[mesh]
half_width = 8.0
cells = 512
[model]
beta = 1.0
p = 2.0
[initial]
kind = "gaussian_bump"
center = 1.5
width = 0.25
mass = 1.0
[time]
horizon = 20.0
output_count = 401
[checks]
run = ["mass", "envelope", "contraction", "comparison", "scaling"]
"#,
    },
    Preset {
        name: "gaussian_floor",
        description: "gaussian_reference with a 0.05 floor: strictly positive data for the pressure bounds",
        toml: r#"
name = "gaussian_floor"
[potential]
kind = "gaussian"
[mesh]
half_width = 8.0
cells = 512
[model]
beta = 1.0
p = 2.0
[initial]
kind = "gaussian_bump"
center = 1.5
width = 0.25
mass = 1.0
floor = 0.05
[time]
horizon = 20.0
output_count = 401
[checks]
run = ["mass", "envelope", "ab", "barrier"]
barrier_center = 0.0
barrier_radius = 1.0
"#,
    },
    Preset {
        name: "dissipation_dense",
        description: "gaussian_floor on [0, 1] with snapshots every 1e-3 for the L^p dissipation identity",
        toml: r#"
name = "dissipation_dense"
[potential]
kind = "gaussian"
[mesh]
half_width = 8.0
cells = 512
[model]
beta = 1.0
p = 2.0
[initial]
kind = "gaussian_bump"
center = 1.5
width = 0.25
mass = 1.0
floor = 0.05
[time]
horizon = 1.0
output_count = 1001
[checks]
run = ["mass", "dissipation"]
"#,
    },
    Preset {
        name: "subexp_alpha1",
        description: "Exponential-type tails: V = (x^2 + delta^2)^(1/2), a smoothed |x|",
        toml: r#"
name = "subexp_alpha1"
[potential]
kind = "smoothed_power"
params = [1.0]
[mesh]
half_width = 16.0
cells = 512
[model]
beta = 1.0
p = 2.0
[initial]
kind = "gaussian_bump"
center = 1.0
width = 0.5
mass = 1.0
[time]
horizon = 20.0
output_count = 201
[checks]
run = ["mass", "envelope", "contraction"]
"#,
    },
    Preset {
        name: "double_well",
        description: "Double-well potential (x^2 - 1)^2 / 4, mass starting in one well",
        toml: r#"
name = "double_well"
[potential]
kind = "double_well"
params = [1.0]
[mesh]
half_width = 3.0
cells = 384
[model]
beta = 1.0
p = 2.0
[initial]
kind = "gaussian_bump"
center = 1.0
width = 0.3
mass = 1.0
[time]
horizon = 20.0
output_count = 201
[checks]
run = ["mass", "envelope", "comparison"]
"#,
    },
    Preset {
        name: "peaked_L1_only",
        description: "Unit mass concentrated in a spike (sup ~ 1e3): the bound must not see the L^p norm",
        toml: r#"
name = "peaked_L1_only"
[potential]
kind = "gaussian"
[mesh]
half_width = 8.0
cells = 512
[model]
beta = 1.0
p = 2.0
[initial]
kind = "peaked"
mass = 1.0
sharpness = 40.0
center = 2.5
[time]
horizon = 20.0
output_times = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0]
[checks]
run = ["mass", "envelope"]
"#,
    },
    Preset {
        name: "contraction_pair",
        description: "Two bumps on the same mesh: L1 contraction and the comparison principle",
        toml: r#"
name = "contraction_pair"
[potential]
kind = "gaussian"
[mesh]
half_width = 6.0
cells = 384
[model]
beta = 1.0
p = 2.0
[initial]
kind = "gaussian_bump"
center = 1.0
width = 0.4
mass = 1.0
[time]
horizon = 5.0
output_count = 101
[checks]
run = ["contraction", "comparison"]
partner = { kind = "gaussian_bump", center = -1.5, width = 0.6, mass = 1.0 }
comparison_offset = 0.1
"#,
    },
    Preset {
        name: "cascade_demo",
        description: "Dirichlet ball problems with boundary data 2^-i, i = 1..4, ordered by level",
        toml: r#"
name = "cascade_demo"
[potential]
kind = "gaussian"
[mesh]
half_width = 4.0
cells = 256
[model]
beta = 1.0
p = 2.0
[solver]
boundary = "dirichlet"
boundary_value = 0.0
[initial]
kind = "gaussian_bump"
center = 0.5
width = 0.5
mass = 1.0
[time]
horizon = 5.0
output_count = 51
[checks]
run = ["cascade", "comparison"]
cascade_levels = 4
"#,
    },
    Preset {
        name: "stationary",
        description: "Constant data: every functional stays at its equilibrium value",
        toml: r#"
name = "stationary"
[mesh]
half_width = 6.0
cells = 256
[initial]
kind = "constant"
mass = 1.0
[time]
horizon = 2.0
output_count = 21
[checks]
run = ["mass", "envelope", "dissipation", "ab", "comparison", "contraction", "scaling"]
partner = { kind = "constant", mass = 1.0 }
"#,
    },
];

/// The built-in scenarios, in catalog order.
pub fn list_presets() -> &'static [Preset] {
    PRESETS
}

pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
