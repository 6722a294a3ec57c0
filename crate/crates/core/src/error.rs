use thiserror::Error;

/// Errors raised by the operators and verification routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature did not converge: estimate {estimate:.3e} above tolerance {tolerance:.3e} after {rounds} refinements")]
    QuadratureNonconvergence {
        estimate: f64,
        tolerance: f64,
        rounds: u32,
    },

    #[error("analytic first moment unavailable for {0}; use the quadrature method")]
    UnsupportedAnalytic(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("stencil error: {0}")]
    Stencil(String),

    #[error("modulus search did not stabilize within {rounds} doubling rounds (last change {change:.3e})")]
    ModulusNonconvergence { rounds: u32, change: f64 },

    #[error("csv error: {0}")]
    Csv(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
