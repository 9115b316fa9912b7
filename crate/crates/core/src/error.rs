use thiserror::Error;

/// Errors raised across the laboratory.
///
/// Each variant maps onto one of the CLI exit classes through [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truncation orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("series is not invertible: constant coefficient is zero")]
    NonInvertible,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid resolution insufficient: {0}")]
    Resolution(String),

    #[error("finite-difference stencil needs at least {needed} time points, got {got}")]
    Stencil { needed: usize, got: usize },

    #[error("source support touches the time-grid boundary (edge/peak ratio {ratio:e})")]
    Support { ratio: f64 },

    #[error("field is not real: {0}")]
    Reality(String),

    #[error("vector field is not homothetic (residual {residual:e})")]
    NotHomothetic { residual: f64 },

    #[error("S^-1 undefined: spectrum decays at rate {rate} <= {threshold} (offending mode {mode})")]
    DomainViolation { mode: i64, rate: f64, threshold: f64 },

    #[error("kernel tail mass outside the grid is {deficit:e}, tolerance {tolerance:e}")]
    TailMass { deficit: f64, tolerance: f64 },

    #[error("state undefined for mode with k^2 + 6 xi = {value} <= 1")]
    StateDomain { value: f64 },

    #[error("position kernel is degenerate at lambda = 0; use the identity")]
    DegenerateKernel,

    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    #[error("tolerance check failed: {0}")]
    Tolerance(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// CLI exit status: 1 validation, 2 numerical tolerance, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 3,
            Error::CrossCheck(_) | Error::Tolerance(_) => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
