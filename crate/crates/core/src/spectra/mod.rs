//! Spectral functions of invariant Toeplitz operators.
//!
//! For a symbol `a` in one of the three geometries, the Toeplitz operator is
//! unitarily equivalent to multiplication by its spectral function:
//!
//! - elliptic, `k ∈ Z_+`: `Γ(k+λ+2)/(Γ(k+1)Γ(λ+1)) ∫_0^1 a(√r) r^k (1-r)^λ dr`
//! - parabolic, `η > 0`: `(1/Γ(λ+1)) ∫_0^∞ a(t/(2η)) t^λ e^{-t} dt`
//! - hyperbolic, `η ∈ R`: `2^λ (λ+1) ϑ_λ(η)² ∫_0^π a(θ) e^{-2ηθ} sin^λθ dθ`
//!
//! δ-derivative terms act on the kernels by `(δ^{(m)}_{x0}, ψ) = (-1)^m ψ^{(m)}(x0)`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::Estimate;
use crate::specfun::WeightParameter;
use crate::symbols::{Geometry, SymbolSpec};

pub mod calculus;
pub mod derivatives;
pub mod elliptic;
pub mod hyperbolic;
pub mod parabolic;

pub use calculus::{
    apply_calculus, compactness_estimate, sup_norm, CalculusVector, CompactnessReport,
    CompactnessVerdict, GridFunction, SupNorm,
};
pub use hyperbolic::{half_pi_delta_forms, HalfPiDeltaForms};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralOptions {
    /// Absolute tolerance on each spectral value.
    pub tol: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { tol: DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub point: f64,
    pub value: Complex64,
    pub converged: bool,
}

/// Sampled spectral function together with the data needed to re-evaluate it.
#[derive(Debug, Clone)]
pub struct SpectralFunction {
    geometry: Geometry,
    lambda: WeightParameter,
    symbol: Arc<SymbolSpec>,
    options: SpectralOptions,
    samples: Vec<Sample>,
}

impl SpectralFunction {
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }
    pub fn lambda(&self) -> WeightParameter {
        self.lambda
    }
    pub fn symbol(&self) -> &SymbolSpec {
        &self.symbol
    }
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }
    pub fn points(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.point).collect()
    }
    pub fn values(&self) -> Vec<Complex64> {
        self.samples.iter().map(|s| s.value).collect()
    }
    pub fn all_converged(&self) -> bool {
        self.samples.iter().all(|s| s.converged)
    }

    /// Recompute the spectral function at a single point.
    pub fn evaluate(&self, point: f64) -> Result<Estimate<f64>> {
        point_value(&self.symbol, self.lambda, point, self.options.tol)
    }
}

fn point_value(
    symbol: &SymbolSpec,
    lambda: WeightParameter,
    point: f64,
    tol: f64,
) -> Result<Estimate<f64>> {
    match symbol.geometry() {
        Geometry::Elliptic => elliptic::value(symbol, lambda, to_index(point)?, tol),
        Geometry::Parabolic => parabolic::value(symbol, lambda, point, tol),
        Geometry::Hyperbolic => hyperbolic::value(symbol, lambda, point, tol),
    }
}

fn to_index(point: f64) -> Result<u64> {
    if point >= 0.0 && point.fract() == 0.0 && point < 9.0e15 {
        Ok(point as u64)
    } else {
        Err(Error::domain(format!(
            "elliptic grid points are nonnegative integers, got {point}"
        )))
    }
}

/// Spectral function sampled on `grid`, in the symbol's own geometry. Grid
/// points are evaluated in parallel; the output keeps the grid order.
pub fn spectral_function(
    symbol: &SymbolSpec,
    lambda: WeightParameter,
    grid: &[f64],
    options: SpectralOptions,
) -> Result<SpectralFunction> {
    if !(options.tol > 0.0) {
        return Err(Error::param(format!(
            "tolerance must be positive, got {}",
            options.tol
        )));
    }
    let samples = grid
        .par_iter()
        .map(|&t| {
            let e = point_value(symbol, lambda, t, options.tol)?;
            let finite = e.value.is_finite();
            if !finite {
                return Err(Error::NonFinite {
                    at: t,
                    value: e.value,
                });
            }
            Ok(Sample {
                point: t,
                value: Complex64::new(e.value, 0.0),
                converged: e.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralFunction {
        geometry: symbol.geometry(),
        lambda,
        symbol: Arc::new(symbol.clone()),
        options,
        samples,
    })
}

fn expect(symbol: &SymbolSpec, geometry: Geometry) -> Result<()> {
    if symbol.geometry() == geometry {
        Ok(())
    } else {
        Err(Error::GeometryMismatch {
            expected: geometry,
            found: symbol.geometry(),
        })
    }
}

pub fn gamma_elliptic(
    symbol: &SymbolSpec,
    lambda: WeightParameter,
    ks: &[u64],
    options: SpectralOptions,
) -> Result<SpectralFunction> {
    expect(symbol, Geometry::Elliptic)?;
    let grid: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    spectral_function(symbol, lambda, &grid, options)
}

pub fn gamma_parabolic(
    symbol: &SymbolSpec,
    lambda: WeightParameter,
    etas: &[f64],
    options: SpectralOptions,
) -> Result<SpectralFunction> {
    expect(symbol, Geometry::Parabolic)?;
    spectral_function(symbol, lambda, etas, options)
}

pub fn gamma_hyperbolic(
    symbol: &SymbolSpec,
    lambda: WeightParameter,
    etas: &[f64],
    options: SpectralOptions,
) -> Result<SpectralFunction> {
    expect(symbol, Geometry::Hyperbolic)?;
    spectral_function(symbol, lambda, etas, options)
}

/// Default sampling grid per geometry: `k = 0..=200`, 61 log-spaced
/// `η ∈ [10^-3, 10^3]`, and 81 points on `η ∈ [-20, 20]`.
pub fn default_grid(geometry: Geometry) -> Vec<f64> {
    match geometry {
        Geometry::Elliptic => (0..=200).map(f64::from).collect(),
        Geometry::Parabolic => (0..=60)
            .map(|i| 10f64.powf(-3.0 + 0.1 * i as f64))
            .collect(),
        Geometry::Hyperbolic => (0..=80).map(|i| -20.0 + 0.5 * i as f64).collect(),
    }
}

#[cfg(test)]
mod tests;
