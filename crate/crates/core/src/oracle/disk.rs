//! Truncated Toeplitz matrices `⟨T_a e_j, e_k⟩` on the weighted disk.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{falling, leibniz};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_panel, Panel};
use crate::specfun::{ln_beta, ln_gamma, WeightParameter};
use crate::symbols::{Geometry, SymbolSpec};

pub const MAX_DISK_SIZE: usize = 64;

/// Relative tolerance for each radial moment.
const MOMENT_TOL: f64 = 1e-13;

pub type PlanarFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

/// Symbol on the disk, as a function of polar coordinates `(ρ, θ)`.
#[derive(Clone)]
pub enum DiskSymbol {
    Radial(SymbolSpec),
    /// Anything else; used to check that non-invariant symbols are not
    /// diagonalized.
    Planar {
        f: PlanarFn,
        label: String,
    },
}

impl DiskSymbol {
    pub fn planar(
        label: impl Into<String>,
        f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        DiskSymbol::Planar {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    /// `a(z) = Re z`.
    pub fn real_part() -> Self {
        Self::planar("re_z", |rho, theta| Complex64::new(rho * theta.cos(), 0.0))
    }

    pub fn label(&self) -> &str {
        match self {
            DiskSymbol::Radial(s) => s.label(),
            DiskSymbol::Planar { label, .. } => label,
        }
    }
}

impl fmt::Debug for DiskSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiskSymbol::Radial(s) => f.debug_tuple("Radial").field(s).finish(),
            DiskSymbol::Planar { label, .. } => {
                f.debug_struct("Planar").field("label", label).finish()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ToeplitzMatrix {
    pub lambda: f64,
    pub size: usize,
    /// `entries[j][k] = ⟨T_a e_j, e_k⟩`.
    pub entries: Vec<Vec<Complex64>>,
    pub angular_points: usize,
    pub converged: bool,
}

impl ToeplitzMatrix {
    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.size).map(|k| self.entries[k][k]).collect()
    }

    pub fn off_diagonal_max(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, row) in self.entries.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if j != k {
                    worst = worst.max(v.norm());
                }
            }
        }
        worst
    }

    /// `max |M[j][k] - conj(M[k][j])|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.size {
            for k in 0..self.size {
                worst = worst.max((self.entries[j][k] - self.entries[k][j].conj()).norm());
            }
        }
        worst
    }
}

/// `ln c_k²` with `c_k² = Γ(k+λ+2) / (k! Γ(λ+2))`, the squared norm factor of
/// the monomial basis.
fn ln_basis_norm_sq(k: usize, lambda: f64) -> Result<f64> {
    let kf = k as f64;
    Ok(ln_gamma(kf + lambda + 2.0)? - ln_gamma(kf + 1.0)? - ln_gamma(lambda + 2.0)?)
}

/// `∫_0^1 a(ρ) ρ^{n+1} (1-ρ²)^λ dρ` for a radial symbol, in the variable
/// `r = ρ²`; an odd `n` moves `r^{1/2}` into the rule.
fn radial_moment(symbol: &SymbolSpec, n: usize, lambda: f64) -> Result<(f64, bool)> {
    let scale = ln_beta(0.5 * n as f64 + 1.0, lambda + 1.0)?.exp();
    let tol = MOMENT_TOL * scale;
    let mut cuts = vec![0.0];
    cuts.extend(symbol.breakpoints().iter().map(|b| b * b));
    cuts.push(1.0);
    let whole = (n / 2) as i32;
    let half = if n % 2 == 1 { 0.5 } else { 0.0 };
    let share = tol / (cuts.len() - 1) as f64;
    let mut total = 0.0;
    let mut converged = true;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let left = if a == 0.0 { half } else { 0.0 };
        let right = if b == 1.0 { lambda } else { 0.0 };
        let f = |r: f64| {
            let mut v = symbol.eval_function_part(r.sqrt()).unwrap_or(f64::NAN) * r.powi(whole);
            if a != 0.0 {
                v *= r.powf(half);
            }
            if b != 1.0 {
                v *= (1.0 - r).powf(lambda);
            }
            v
        };
        let e = integrate_panel(f, Panel::new(a, b, left, right), share)?;
        total += e.value;
        converged &= e.converged;
    }
    let mut value = 0.5 * total;
    for d in symbol.deltas() {
        // (-1)^m d^m/dρ^m [ρ^{n+1} (1-ρ)^λ (1+ρ)^λ] at ρ0
        let rho = d.loc();
        let p = n as f64 + 1.0;
        let mono = |i: u32| falling(p, i) * rho.powf(p - i as f64);
        let minus = |i: u32| {
            falling(lambda, i)
                * (1.0 - rho).powf(lambda - i as f64)
                * if i % 2 == 0 { 1.0 } else { -1.0 }
        };
        let plus = |i: u32| falling(lambda, i) * (1.0 + rho).powf(lambda - i as f64);
        let sign = if d.order() % 2 == 0 { 1.0 } else { -1.0 };
        value += sign * d.coef() * leibniz(d.order(), &[&mono, &minus, &plus]);
    }
    Ok((value, converged))
}

/// `∫_0^1 a(ρ, θ) ρ^{n+1} (1-ρ²)^λ dρ` for a planar symbol, in `ρ` itself.
fn planar_moment(f: &PlanarFn, theta: f64, n: usize, lambda: f64) -> Result<(Complex64, bool)> {
    let scale = ln_beta(0.5 * n as f64 + 1.0, lambda + 1.0)?.exp();
    let g = |rho: f64| f(rho, theta) * (rho.powi(n as i32 + 1) * (1.0 + rho).powf(lambda));
    let e = integrate_panel(g, Panel::new(0.0, 1.0, 0.0, lambda), MOMENT_TOL * scale)?;
    Ok((e.value, e.converged))
}

/// `M[j][k] = (λ+1)/π ∫_0^1 ∫_0^{2π} a ē_k e_j (1-ρ²)^λ ρ dρ dθ` over the first
/// `size` normalized monomials, with a uniform angular rule of at least
/// `4 size` points.
pub fn toeplitz_matrix_disk(
    symbol: &DiskSymbol,
    lambda: WeightParameter,
    size: usize,
) -> Result<ToeplitzMatrix> {
    if size == 0 || size > MAX_DISK_SIZE {
        return Err(Error::param(format!(
            "matrix size must be in 1..={MAX_DISK_SIZE}, got {size}"
        )));
    }
    if let DiskSymbol::Radial(s) = symbol {
        if s.geometry() != Geometry::Elliptic {
            return Err(Error::GeometryMismatch {
                expected: Geometry::Elliptic,
                found: s.geometry(),
            });
        }
    }
    let l = lambda.value();
    let points = (4 * size).max(16);
    let moments = 2 * size - 1;
    // rows: angular node; columns: ρ-moment index j + k
    let table: Vec<(Vec<Complex64>, bool)> = (0..points)
        .into_par_iter()
        .map(|p| {
            let theta = 2.0 * PI * p as f64 / points as f64;
            let mut row = Vec::with_capacity(moments);
            let mut ok = true;
            for n in 0..moments {
                let (v, c) = match symbol {
                    DiskSymbol::Radial(s) => {
                        let (v, c) = radial_moment(s, n, l)?;
                        (Complex64::new(v, 0.0), c)
                    }
                    DiskSymbol::Planar { f, .. } => planar_moment(f, theta, n, l)?,
                };
                row.push(v);
                ok &= c;
            }
            Ok((row, ok))
        })
        .collect::<Result<_>>()?;
    let converged = table.iter().all(|(_, c)| *c);
    let norms: Vec<f64> = (0..size)
        .map(|k| ln_basis_norm_sq(k, l))
        .collect::<Result<_>>()?;
    let mut entries = vec![vec![Complex64::new(0.0, 0.0); size]; size];
    for (j, row) in entries.iter_mut().enumerate() {
        for (k, entry) in row.iter_mut().enumerate() {
            let freq = j as f64 - k as f64;
            let mut sum = Complex64::new(0.0, 0.0);
            for (p, (moments, _)) in table.iter().enumerate() {
                let theta = 2.0 * PI * p as f64 / points as f64;
                sum += moments[j + k] * Complex64::from_polar(1.0, freq * theta);
            }
            let weight = 2.0 * PI / points as f64;
            let c = (0.5 * (norms[j] + norms[k])).exp();
            *entry = sum * (weight * (l + 1.0) / PI * c);
        }
    }
    Ok(ToeplitzMatrix {
        lambda: l,
        size,
        entries,
        angular_points: points,
        converged,
    })
}
