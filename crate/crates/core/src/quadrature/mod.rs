//! Weighted Gaussian rules and integrators.
//!
//! - [`rules`]: Gauss rules for the Jacobi (on `[0,1]` and `[-1,1]`),
//!   generalized Laguerre and Legendre weights.
//! - [`cache`]: process-wide rule cache.
//! - [`panel`]: one panel with algebraic endpoint weights, order doubling.
//! - [`adaptive`]: Gauss–Kronrod 7/15 global bisection.
//! - [`oscillatory`]: `∫_{t0}^∞ A(t) sin t dt` for slowly varying `A`.

use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;

pub mod adaptive;
pub mod cache;
pub mod oscillatory;
pub mod panel;
pub mod rules;

pub use adaptive::{
    adaptive_integrate, adaptive_integrate_with, log_axis_integrate, AdaptiveOptions,
};
pub use cache::rule;
pub use oscillatory::{sine_tail, TailOptions};
pub use panel::{fixed_panel, integrate_panel, integrate_panels, Panel};
pub use rules::{
    build_generalized_laguerre, build_jacobi, build_jacobi01, build_legendre, Family,
    QuadratureRule, MAX_JACOBI_ORDER, MAX_LAGUERRE_ORDER,
};

/// Scalar types an integrator can accumulate.
pub trait QuadValue:
    Copy
    + Add<Output = Self>
    + AddAssign
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + Send
    + Sync
    + std::fmt::Debug
    + 'static
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Value with an error estimate; `converged` is false when the estimate
/// missed the requested tolerance within the integrator's budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
}

impl<T: QuadValue> Estimate<T> {
    pub fn exact(value: T) -> Self {
        Estimate {
            value,
            error: 0.0,
            converged: true,
        }
    }

    pub fn zero() -> Self {
        Self::exact(T::zero())
    }

    /// Sum of two estimates.
    pub fn combine(self, other: Self) -> Self {
        Estimate {
            value: self.value + other.value,
            error: self.error + other.error,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        Estimate {
            value: self.value * factor,
            error: self.error * factor.abs(),
            converged: self.converged,
        }
    }
}
