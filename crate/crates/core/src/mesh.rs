//! Truncated 1-D grid carrying the discrete Gibbs measure `pi = e^{-V}`.
//!
//! Cells are `[x_i - h/2, x_i + h/2]` covering `[-R, R]`. Cell weights are
//! midpoint evaluations of `e^{-V}` normalized so that `h * sum(pi_i) = 1`;
//! face weights use the same normalizer and are pointwise evaluations at the
//! faces, which makes the flux-form operator symmetric in `l2(pi)`.

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    /// `V = k x^2 / 2`, spectral gap `k` on the whole line.
    Gaussian { stiffness: f64 },
    /// `V = (x^2 + delta^2)^(alpha/2)`, a smooth stand-in for `|x|^alpha`.
    SmoothedPower { alpha: f64, delta: f64 },
    /// `V = (x^2 - a^2)^2 / 4`.
    DoubleWell { separation: f64 },
    /// `V = 0`; only meaningful on a bounded domain, which is all we have.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    pub kind: PotentialKind,
    /// Additive constant. Cancels in the normalized measure.
    pub offset: f64,
}

pub const DEFAULT_SMOOTHING: f64 = 1e-2;

impl Potential {
    pub fn new(kind: PotentialKind) -> Self {
        Potential { kind, offset: 0.0 }
    }

    pub fn gaussian() -> Self {
        Self::new(PotentialKind::Gaussian { stiffness: 1.0 })
    }

    pub fn flat() -> Self {
        Self::new(PotentialKind::Flat)
    }

    pub fn smoothed_power(alpha: f64) -> Self {
        Self::new(PotentialKind::SmoothedPower {
            alpha,
            delta: DEFAULT_SMOOTHING,
        })
    }

    pub fn double_well(separation: f64) -> Self {
        Self::new(PotentialKind::DoubleWell { separation })
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    /// Builds a potential from its configuration name and positional parameters.
    ///
    /// | name             | params                         |
    /// |------------------|--------------------------------|
    /// | `gaussian`       | `[stiffness = 1]`              |
    /// | `smoothed_power` | `[alpha = 1, delta = 1e-2]`    |
    /// | `double_well`    | `[separation = 1]`             |
    /// | `flat`           | `[]`                           |
    pub fn from_spec(name: &str, params: &[f64]) -> Result<Self> {
        let get = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
        let max_params = |n: usize| {
            if params.len() > n {
                Err(Error::param(
                    "potential.params",
                    format!("`{name}` takes at most {n} parameters, got {}", params.len()),
                ))
            } else {
                Ok(())
            }
        };
        let kind = match name {
            "gaussian" => {
                max_params(1)?;
                PotentialKind::Gaussian {
                    stiffness: get(0, 1.0),
                }
            }
            "smoothed_power" => {
                max_params(2)?;
                PotentialKind::SmoothedPower {
                    alpha: get(0, 1.0),
                    delta: get(1, DEFAULT_SMOOTHING),
                }
            }
            "double_well" => {
                max_params(1)?;
                PotentialKind::DoubleWell {
                    separation: get(0, 1.0),
                }
            }
            "flat" => {
                max_params(0)?;
                PotentialKind::Flat
            }
            other => {
                return Err(Error::param(
                    "potential.kind",
                    format!("unknown potential `{other}`"),
                ))
            }
        };
        let potential = Potential::new(kind);
        potential.validate()?;
        Ok(potential)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PotentialKind::Gaussian { stiffness } if !(stiffness > 0.0 && stiffness.is_finite()) => {
                Err(Error::param("potential.stiffness", "must be positive"))
            }
            PotentialKind::SmoothedPower { alpha, delta } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    Err(Error::param("potential.alpha", "must be positive"))
                } else if !(delta > 0.0 && delta.is_finite()) {
                    Err(Error::param("potential.delta", "must be positive for smoothness"))
                } else {
                    Ok(())
                }
            }
            PotentialKind::DoubleWell { separation } if !separation.is_finite() => {
                Err(Error::param("potential.separation", "must be finite"))
            }
            _ if !self.offset.is_finite() => Err(Error::param("potential.offset", "must be finite")),
            _ => Ok(()),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.offset
            + match self.kind {
                PotentialKind::Gaussian { stiffness } => 0.5 * stiffness * x * x,
                PotentialKind::SmoothedPower { alpha, delta } => {
                    (x * x + delta * delta).powf(0.5 * alpha)
                }
                PotentialKind::DoubleWell { separation } => {
                    let s = x * x - separation * separation;
                    0.25 * s * s
                }
                PotentialKind::Flat => 0.0,
            }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self.kind {
            PotentialKind::Gaussian { stiffness } => stiffness * x,
            PotentialKind::SmoothedPower { alpha, delta } => {
                alpha * x * (x * x + delta * delta).powf(0.5 * alpha - 1.0)
            }
            PotentialKind::DoubleWell { separation } => x * (x * x - separation * separation),
            PotentialKind::Flat => 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PotentialKind::Gaussian { .. } => "gaussian",
            PotentialKind::SmoothedPower { .. } => "smoothed_power",
            PotentialKind::DoubleWell { .. } => "double_well",
            PotentialKind::Flat => "flat",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMesh {
    pub potential: Potential,
    pub half_width: f64,
    pub h: f64,
    pub centers: Vec<f64>,
    /// `pi_i`, normalized so that `h * sum(pi_i) = 1`.
    pub cell_weights: Vec<f64>,
    /// `pi_{i+1/2}` for faces `-R, -R+h, ..., R` (`n + 1` entries).
    pub face_weights: Vec<f64>,
    /// `Z_h = h * sum(e^{-V(x_i)})`.
    pub normalizer: f64,
}

impl WeightedMesh {
    pub fn n_cells(&self) -> usize {
        self.centers.len()
    }

    pub fn face_position(&self, face: usize) -> f64 {
        -self.half_width + face as f64 * self.h
    }

    /// `h * sum(u_i * pi_i)`.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        self.h
            * u.iter()
                .zip(&self.cell_weights)
                .map(|(u, w)| u * w)
                .sum::<f64>()
    }

    /// `h * sum(f(u_i) * pi_i)`.
    pub fn integrate_with(&self, u: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        self.h
            * u.iter()
                .zip(&self.cell_weights)
                .map(|(&u, w)| f(u) * w)
                .sum::<f64>()
    }

    /// Largest `(pi_{i-1/2} + pi_{i+1/2}) / pi_i` over the cells.
    pub fn max_weight_ratio(&self) -> f64 {
        self.cell_weights
            .iter()
            .enumerate()
            .map(|(i, w)| (self.face_weights[i] + self.face_weights[i + 1]) / w)
            .fold(0.0, f64::max)
    }

    pub fn check_field(&self, values: &[f64]) -> Result<()> {
        check_len(self.n_cells(), values.len())
    }
}

/// Discretizes `[-R, R]` into `n` cells and builds the normalized Gibbs weights.
pub fn build_mesh(potential: Potential, half_width: f64, n_cells: usize) -> Result<WeightedMesh> {
    potential.validate()?;
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::param("half_width", "must be positive and finite"));
    }
    if n_cells < 2 {
        return Err(Error::param("n_cells", "need at least 2 cells"));
    }
    let h = 2.0 * half_width / n_cells as f64;
    let centers: Vec<f64> = (0..n_cells)
        .map(|i| -half_width + (i as f64 + 0.5) * h)
        .collect();
    let faces: Vec<f64> = (0..=n_cells).map(|i| -half_width + i as f64 * h).collect();

    let eval = |x: f64| {
        let v = potential.value(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinitePotential { x })
        }
    };
    let cell_v = centers.iter().map(|&x| eval(x)).collect::<Result<Vec<_>>>()?;
    let face_v = faces.iter().map(|&x| eval(x)).collect::<Result<Vec<_>>>()?;

    // shift by the minimum so nothing overflows; the shift cancels on normalization
    let v_min = cell_v.iter().chain(&face_v).copied().fold(f64::INFINITY, f64::min);
    let shifted = |v: f64| (-(v - v_min)).exp();
    let raw_cells: Vec<f64> = cell_v.iter().map(|&v| shifted(v)).collect();
    let sum: f64 = raw_cells.iter().sum();
    let scaled_z = h * sum;

    let cell_weights: Vec<f64> = raw_cells.iter().map(|w| w / scaled_z).collect();
    let face_weights: Vec<f64> = face_v.iter().map(|&v| shifted(v) / scaled_z).collect();
    for (x, w) in centers.iter().zip(&cell_weights).chain(faces.iter().zip(&face_weights)) {
        if !(*w > 0.0) {
            return Err(Error::DegenerateWeight { x: *x });
        }
    }

    Ok(WeightedMesh {
        potential,
        half_width,
        h,
        centers,
        cell_weights,
        face_weights,
        normalizer: scaled_z * (-v_min).exp(),
    })
}

/// Cell-centred nonnegative density at a time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub values: Vec<f64>,
    pub time: f64,
}

impl DensityField {
    pub fn new(values: Vec<f64>, time: f64) -> Result<Self> {
        validate_density(&values)?;
        Ok(DensityField { values, time })
    }

    pub fn constant(value: f64, n_cells: usize) -> Result<Self> {
        Self::new(vec![value; n_cells], 0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `h * sum(mu_i * pi_i)`.
    pub fn mass(&self, mesh: &WeightedMesh) -> f64 {
        mesh.integrate(&self.values)
    }
}

pub(crate) fn validate_density(values: &[f64]) -> Result<()> {
    for (cell, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteDensity { cell });
        }
        if value < 0.0 {
            return Err(Error::NegativeDensity { cell, value });
        }
    }
    Ok(())
}

/// `(h * sum(mu_i^p * pi_i))^(1/p)`.
pub fn lp_norm(field: &DensityField, mesh: &WeightedMesh, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param("p", "must be positive and finite"));
    }
    mesh.check_field(&field.values)?;
    let integral = if p == 1.0 {
        mesh.integrate(&field.values)
    } else {
        mesh.integrate_with(&field.values, |u| u.powf(p))
    };
    Ok(integral.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flat_mesh_has_uniform_weights() {
        let mesh = build_mesh(Potential::flat(), 1.0, 4).unwrap();
        assert_eq!(mesh.h, 0.5);
        for w in mesh.cell_weights.iter().chain(&mesh.face_weights) {
            assert!((w - 0.5).abs() < 1e-15);
        }
        assert!((mesh.normalizer - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_mesh_is_a_probability_measure() {
        let mesh = build_mesh(Potential::gaussian(), 8.0, 1024).unwrap();
        let total = mesh.h * mesh.cell_weights.iter().sum::<f64>();
        assert!((total - 1.0).abs() < 1e-14);
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn gaussian_normalizer_matches_quadrature() {
        let oracle = simpson(|x| (-0.5 * x * x).exp(), -8.0, 8.0, 200_000);
        assert!((oracle - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
        let mesh = build_mesh(Potential::gaussian(), 8.0, 1024).unwrap();
        assert!((mesh.normalizer - oracle).abs() < 1e-6);
    }

    #[test]
    fn normalizer_converges_at_second_order() {
        // smoothed_power's normalizer is not spectrally accurate under the midpoint rule
        let pot = Potential::smoothed_power(1.0);
        let oracle = simpson(|x| (-pot.value(x)).exp(), -6.0, 6.0, 2_000_000);
        let err = |n| (build_mesh(pot, 6.0, n).unwrap().normalizer - oracle).abs();
        let (e1, e2) = (err(64), err(128));
        assert!(e1 > 1e-9);
        assert!(e1 / e2 > 3.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn face_weights_are_pointwise() {
        let mesh = build_mesh(Potential::double_well(1.2), 3.0, 30).unwrap();
        for (k, w) in mesh.face_weights.iter().enumerate() {
            let x = mesh.face_position(k);
            let expected = (-mesh.potential.value(x)).exp() / mesh.normalizer;
            assert!((w - expected).abs() < 1e-14 * expected.max(1.0));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_mesh(Potential::gaussian(), 0.0, 10).is_err());
        assert!(build_mesh(Potential::gaussian(), 1.0, 1).is_err());
        let err = build_mesh(Potential::smoothed_power(2.0), 1e200, 10).unwrap_err();
        assert!(matches!(err, Error::NonFinitePotential { .. }), "{err:?}");
        let err = build_mesh(Potential::gaussian(), 60.0, 10).unwrap_err();
        assert!(matches!(err, Error::DegenerateWeight { .. }), "{err:?}");
        assert!(Potential::from_spec("quartic", &[]).is_err());
        assert!(Potential::from_spec("flat", &[1.0]).is_err());
    }

    #[test]
    fn lp_norm_examples() {
        let mesh = build_mesh(Potential::gaussian(), 5.0, 64).unwrap();
        let ones = DensityField::constant(1.0, 64).unwrap();
        for p in [0.5, 1.0, 2.0, 7.5] {
            assert!((lp_norm(&ones, &mesh, p).unwrap() - 1.0).abs() < 1e-13);
        }
        let twos = DensityField::constant(2.0, 64).unwrap();
        assert!((lp_norm(&twos, &mesh, 1.0).unwrap() - 2.0).abs() < 1e-13);

        let flat = build_mesh(Potential::flat(), 1.0, 4).unwrap();
        let half = DensityField::new(vec![1.0, 1.0, 0.0, 0.0], 0.0).unwrap();
        // hand quadrature: h * pi * 2 cells = 0.5 * 0.5 * 2 = 1/2
        assert!((lp_norm(&half, &flat, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);

        let zero = DensityField::constant(0.0, 4).unwrap();
        assert_eq!(lp_norm(&zero, &flat, 3.0).unwrap(), 0.0);
        assert!(lp_norm(&half, &flat, 0.0).is_err());
        assert!(lp_norm(&half, &flat, -1.0).is_err());
        assert!(lp_norm(&ones, &flat, 2.0).is_err());
    }

    #[test]
    fn density_rejects_negative_and_nan() {
        assert!(matches!(
            DensityField::new(vec![1.0, -0.5], 0.0),
            Err(Error::NegativeDensity { cell: 1, .. })
        ));
        assert!(matches!(
            DensityField::new(vec![f64::NAN], 0.0),
            Err(Error::NonFiniteDensity { cell: 0 })
        ));
    }

    proptest! {
        #[test]
        fn measure_is_normalized(kind in 0usize..4, r in 0.5f64..10.0, n in 2usize..400) {
            let pot = match kind {
                0 => Potential::gaussian(),
                1 => Potential::smoothed_power(1.0),
                2 => Potential::double_well(1.0),
                _ => Potential::flat(),
            };
            let r = if kind == 2 { r.min(4.0) } else { r };
            let mesh = build_mesh(pot, r, n).unwrap();
            let total = mesh.h * mesh.cell_weights.iter().sum::<f64>();
            prop_assert!((total - 1.0).abs() <= 4.0 * n as f64 * f64::EPSILON);
            prop_assert!(mesh.cell_weights.iter().all(|w| *w > 0.0));
            prop_assert!(mesh.face_weights.iter().all(|w| *w > 0.0));
        }

        #[test]
        fn lp_norm_monotone_in_p(
            raw in proptest::collection::vec(0.0f64..3.0, 40),
            p in 0.5f64..4.0,
            dq in 0.0f64..3.0,
        ) {
            let mesh = build_mesh(Potential::gaussian(), 4.0, 40).unwrap();
            let field = DensityField::new(raw, 0.0).unwrap();
            let a = lp_norm(&field, &mesh, p).unwrap();
            let b = lp_norm(&field, &mesh, p + dq).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-12) + 1e-300);
        }
    }
}
