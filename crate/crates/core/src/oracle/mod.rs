//! Direct Bergman-space computations that the spectral formulas must
//! reproduce.
//!
//! Everything here works from the measure and the coherent test functions
//! alone: the disk routines integrate `⟨a e_j, e_k⟩` in two dimensions, and the
//! half-plane routines integrate `⟨a f, g⟩` for test functions whose
//! transforms are known in closed form. None of them call into
//! [`crate::spectra`]; the `*_spectral` functions take an already computed
//! spectral function as input.

use std::cell::{Cell, RefCell};
use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub mod disk;
pub mod hyperbolic;
pub mod parabolic;

pub use disk::{toeplitz_matrix_disk, DiskSymbol, ToeplitzMatrix, MAX_DISK_SIZE};
pub use hyperbolic::{
    hyperbolic_comparison, hyperbolic_form_direct, hyperbolic_form_spectral,
    packet_weighted_integral, WavePacket,
};
pub use parabolic::{
    normalization_probe, parabolic_form_direct, parabolic_form_spectral, resolution_apply_check,
    resolution_kernel_forms, resolution_kernel_parabolic, unitarity_check_parabolic, CoherentState,
    KernelForms, NormalizationCandidate, NormalizationReport,
};

/// Grids, windows and tolerances behind a computed value.
pub type Settings = BTreeMap<String, f64>;

/// A value computed on the Bergman-space side paired with its spectral-side
/// counterpart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormComparison {
    pub direct: Complex64,
    pub spectral: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// Every quadrature behind both values met its tolerance.
    pub converged: bool,
    pub settings: Settings,
}

impl FormComparison {
    pub fn new(
        direct: Complex64,
        spectral: Complex64,
        converged: bool,
        settings: Settings,
    ) -> Self {
        let abs_err = (direct - spectral).norm();
        let rel_err = if spectral.norm() > 0.0 {
            abs_err / spectral.norm()
        } else {
            abs_err
        };
        FormComparison {
            direct,
            spectral,
            abs_err,
            rel_err,
            converged,
            settings,
        }
    }

    pub fn within(&self, rel_tol: f64) -> bool {
        self.rel_err <= rel_tol
    }
}

/// A computed value together with its quadrature bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleValue {
    pub value: Complex64,
    pub converged: bool,
    pub settings: Settings,
}

/// Collects convergence flags and the first error from inside integrand
/// closures, which cannot return `Result`.
pub(crate) struct Tracker {
    pub(crate) converged: Cell<bool>,
    failure: RefCell<Option<Error>>,
}

impl Tracker {
    pub(crate) fn new() -> Self {
        Tracker {
            converged: Cell::new(true),
            failure: RefCell::new(None),
        }
    }

    pub(crate) fn record<T>(&self, r: Result<(T, bool)>, fallback: T) -> T {
        match r {
            Ok((v, ok)) => {
                if !ok {
                    self.converged.set(false);
                }
                v
            }
            Err(e) => {
                self.failure.borrow_mut().get_or_insert(e);
                fallback
            }
        }
    }

    pub(crate) fn finish(self) -> Result<bool> {
        match self.failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(self.converged.get()),
        }
    }
}

/// `p (p-1) ⋯ (p-i+1)`.
pub(crate) fn falling(p: f64, i: u32) -> f64 {
    (0..i).map(|j| p - j as f64).product()
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    (0..k).map(|j| (n - j) as f64 / (j + 1) as f64).product()
}

/// `d^m/dx^m` of a product of factors, each given by a closure returning
/// its own `i`-th derivative at the point of interest.
pub(crate) fn leibniz<T>(m: u32, factors: &[&dyn Fn(u32) -> T]) -> T
where
    T: Copy
        + std::ops::Add<Output = T>
        + std::ops::Mul<Output = T>
        + std::ops::Mul<f64, Output = T>,
{
    match factors {
        [] => panic!("leibniz needs at least one factor"),
        [only] => only(m),
        [first, rest @ ..] => {
            let mut acc = first(m) * leibniz(0, rest);
            for i in 0..m {
                acc = acc + first(i) * leibniz(m - i, rest) * binomial(m, i);
            }
            acc
        }
    }
}

/// Derivatives of `sin^λ θ`, kept as a sum of `c sin^a θ cos^b θ` terms.
pub(crate) fn sine_power_derivative(lambda: f64, order: u32, theta: f64) -> f64 {
    let mut terms: Vec<(f64, f64, i32)> = vec![(1.0, lambda, 0)];
    for _ in 0..order {
        let mut next = Vec::with_capacity(2 * terms.len());
        for &(c, a, b) in &terms {
            if a != 0.0 {
                next.push((c * a, a - 1.0, b + 1));
            }
            if b != 0 {
                next.push((-c * b as f64, a + 1.0, b - 1));
            }
        }
        terms = next;
    }
    let (s, co) = theta.sin_cos();
    terms
        .iter()
        .map(|&(c, a, b)| c * s.powf(a) * co.powi(b))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_matches_direct_derivative() {
        // d³/dx³ [x² e^x] = (x² + 6x + 6) e^x
        let x: f64 = 0.7;
        let poly = |i: u32| match i {
            0 => x * x,
            1 => 2.0 * x,
            2 => 2.0,
            _ => 0.0,
        };
        let exp = |_: u32| x.exp();
        let got = leibniz(3, &[&poly, &exp]);
        assert!((got - (x * x + 6.0 * x + 6.0) * x.exp()).abs() < 1e-14);
        // three factors: d²/dx² [x · x · x] = 6x
        let id = |i: u32| match i {
            0 => x,
            1 => 1.0,
            _ => 0.0,
        };
        assert!((leibniz(2, &[&id, &id, &id]) - 6.0 * x).abs() < 1e-14);
    }

    #[test]
    fn sine_power_derivatives() {
        let t: f64 = 1.1;
        // λ = 1: sin, cos, -sin, -cos, sin
        let expect = [t.sin(), t.cos(), -t.sin(), -t.cos(), t.sin()];
        for (m, e) in expect.iter().enumerate() {
            assert!((sine_power_derivative(1.0, m as u32, t) - e).abs() < 1e-14);
        }
        // λ = 2: d²/dθ² sin²θ = 2 cos 2θ
        assert!((sine_power_derivative(2.0, 2, t) - 2.0 * (2.0 * t).cos()).abs() < 1e-14);
        assert_eq!(sine_power_derivative(0.0, 3, t), 0.0);
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling(5.0, 0), 1.0);
        assert_eq!(falling(5.0, 3), 60.0);
        assert_eq!(falling(-2.0, 2), 6.0);
    }

    #[test]
    fn relative_error_uses_spectral_side() {
        let c = FormComparison::new(
            Complex64::new(1.01, 0.0),
            Complex64::new(1.0, 0.0),
            true,
            Settings::new(),
        );
        assert!((c.rel_err - 0.01).abs() < 1e-12);
        assert!(c.within(0.02) && !c.within(0.005));
    }
}
