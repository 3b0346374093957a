use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("shape mismatch: expected {expected} cells, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("potential is not finite at x = {x}")]
    NonFinitePotential { x: f64 },

    #[error("Gibbs weight underflows to zero at x = {x}; shrink the domain")]
    DegenerateWeight { x: f64 },

    #[error("negative density {value:e} in cell {cell}")]
    NegativeDensity { cell: usize, value: f64 },

    #[error("non-finite density in cell {cell}")]
    NonFiniteDensity { cell: usize },

    #[error("field is identically zero; the logarithmic functionals are -inf")]
    ZeroField,

    #[error("explicit step unstable: cell {cell} reached {value:e} with dt = {dt:e}")]
    Stability { dt: f64, cell: usize, value: f64 },

    #[error("Newton did not converge in {iterations} iterations (last residual {residual:e}, dt = {dt:e})")]
    Newton { iterations: usize, residual: f64, dt: f64 },

    #[error("inverse iteration stagnated after {iterations} iterations (last Rayleigh quotient {rayleigh})")]
    Eigen { iterations: usize, rayleigh: f64 },

    #[error("integration failed at t = {t}: {source}")]
    Integration { t: f64, source: Box<Error> },

    #[error("barrier precondition violated in cell {cell}: initial pressure {pressure} < c = {c}")]
    BarrierPrecondition { cell: usize, pressure: f64, c: f64 },

    #[error("snapshot index {index} out of range (need 1..={max})")]
    Index { index: usize, max: usize },

    #[error("configuration error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Strips any `Integration` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Integration { source, .. } => source.root(),
            e => e,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Shape { expected, actual })
    }
}
