use thiserror::Error;

use crate::symbols::Geometry;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge after {iterations} iterations")]
    Convergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("cannot parse symbol: {0}")]
    Parse(String),

    #[error("geometry mismatch: expected {expected}, found {found}")]
    GeometryMismatch { expected: Geometry, found: Geometry },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("symbol evaluated to a non-finite value {value} at {at}")]
    NonFinite { at: f64, value: f64 },

    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
