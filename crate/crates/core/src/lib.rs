//! Spectral functions of invariant Toeplitz operators on weighted Bergman
//! spaces of the disk and the upper half-plane, with independent quadrature
//! oracles and oscillation classification.

pub mod acceptance;
pub mod classify;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod quadrature;
pub mod specfun;
pub mod spectra;
pub mod symbols;

pub use error::{Error, Result};
pub use specfun::WeightParameter;
pub use symbols::{Geometry, SymbolSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
