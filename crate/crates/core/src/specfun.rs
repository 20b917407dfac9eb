//! Special functions used by the spectral formulas.
//!
//! Everything here works in log space where magnitudes can leave the `f64`
//! range: `|Γ(a + iη)|²` decays like `e^{-π|η|}`, while the hyperbolic weight
//! `ϑ_λ(η)²` carries the compensating factor `e^{πη}`.
//!
//! Log-gamma is evaluated with the Stirling series (ten Bernoulli terms) after
//! shifting the argument to `|z| ≥ 10` with the recurrence `Γ(z+1) = zΓ(z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexValue = Complex64;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Shift target for the Stirling series.
const STIRLING_MIN: f64 = 10.0;

/// `B_{2k} / (2k (2k - 1))` for `k = 1..=10`.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// Iteration cap shared by the incomplete-gamma series and continued fraction.
pub const MAX_ITERATIONS: usize = 20_000;

/// Switchover between the power series and the continued fraction is at
/// `|s| = alpha + SWITCHOVER_OFFSET`.
pub const SWITCHOVER_OFFSET: f64 = 1.0;

/// The weight parameter `λ > -1` of the Bergman space.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct WeightParameter(f64);

impl WeightParameter {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda > -1.0 {
            Ok(Self(lambda))
        } else {
            Err(Error::param(format!(
                "weight parameter must satisfy λ > -1, got {lambda}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for WeightParameter {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeightParameter> for f64 {
    fn from(w: WeightParameter) -> f64 {
        w.0
    }
}

impl std::fmt::Display for WeightParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn stirling_tail(y: f64) -> f64 {
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut p = inv;
    let mut s = 0.0;
    for c in STIRLING {
        s += c * p;
        p *= inv2;
    }
    s
}

fn stirling_real(y: f64) -> f64 {
    (y - 0.5) * y.ln() - y + LN_SQRT_2PI + stirling_tail(y)
}

fn stirling_complex(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut p = inv;
    let mut s = Complex64::new(0.0, 0.0);
    for c in STIRLING {
        s += p * c;
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + s
}

/// `ln Γ(x)` for finite `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!(
            "ln_gamma requires finite x > 0, got {x}"
        )));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x >= STIRLING_MIN {
        return stirling_real(x);
    }
    let mut y = x;
    let mut prod = 1.0;
    while y < STIRLING_MIN {
        prod *= y;
        y += 1.0;
    }
    stirling_real(y) - prod.ln()
}

/// `Γ(x)` for moderate `x > 0` (no overflow protection beyond `exp`).
pub fn gamma(x: f64) -> Result<f64> {
    ln_gamma(x).map(f64::exp)
}

/// `ln |Γ(a + iη)|²` for `a > 0`.
pub fn ln_abs_gamma_sq(a: f64, eta: f64) -> Result<f64> {
    if !a.is_finite() || a <= 0.0 || !eta.is_finite() {
        return Err(Error::domain(format!(
            "ln_abs_gamma_sq requires a > 0 and finite η, got a = {a}, η = {eta}"
        )));
    }
    let mut z = Complex64::new(a, eta);
    let mut acc = 0.0;
    while z.norm() < STIRLING_MIN {
        acc += z.norm_sqr().ln();
        z.re += 1.0;
    }
    Ok(2.0 * stirling_complex(z).re - acc)
}

/// `ln Γ(x + b) - ln Γ(x)` without cancellation for large `x`.
fn ln_gamma_ratio(x: f64, b: f64) -> f64 {
    if x >= STIRLING_MIN {
        (x - 0.5) * (b / x).ln_1p() + b * (x + b).ln() - b + stirling_tail(x + b) - stirling_tail(x)
    } else {
        ln_gamma_unchecked(x + b) - ln_gamma_unchecked(x)
    }
}

/// `Γ(k+λ+2) / (Γ(k+1) Γ(λ+1))`, the elliptic spectral prefactor.
pub fn gamma_ratio_elliptic(k: u64, lambda: WeightParameter) -> f64 {
    ln_gamma_ratio_elliptic(k, lambda).exp()
}

pub fn ln_gamma_ratio_elliptic(k: u64, lambda: WeightParameter) -> f64 {
    let b = lambda.value() + 1.0;
    ln_gamma_ratio(k as f64 + 1.0, b) - ln_gamma_unchecked(b)
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    Ok(ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "incomplete gamma requires α > 0, got {alpha}"
        )))
    }
}

fn check_finite(s: Complex64) -> Result<()> {
    if s.re.is_finite() && s.im.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("non-finite complex argument {s}")))
    }
}

/// Lower incomplete gamma `γ(α, s) = ∫_0^s t^{α-1} e^{-t} dt` (principal branch).
///
/// Uses the power series for `|s| ≤ α + 1` (and whenever `Re s < 0`), and
/// `Γ(α) - Γ(α, s)` with the continued fraction for the upper function
/// otherwise. Accepted region: `Re s ≥ 0` or `|s| ≤ α + 40`.
pub fn lower_incomplete_gamma(alpha: f64, s: Complex64) -> Result<Complex64> {
    check_alpha(alpha)?;
    check_finite(s)?;
    if s.re == 0.0 && s.im == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if !(s.re >= 0.0 || s.norm() <= alpha + 40.0) {
        return Err(Error::domain(format!(
            "lower_incomplete_gamma: s = {s} outside Re s ≥ 0 ∪ |s| ≤ α + 40"
        )));
    }
    if s.norm() <= alpha + SWITCHOVER_OFFSET || s.re < 0.0 {
        lower_incomplete_gamma_series(alpha, s)
    } else {
        let upper = upper_incomplete_gamma_cf(alpha, s)?;
        Ok(ln_gamma_unchecked(alpha).exp() - upper)
    }
}

/// Power series `γ(α,s) = s^α e^{-s} Σ_n s^n / (α (α+1) ⋯ (α+n))`.
pub fn lower_incomplete_gamma_series(alpha: f64, s: Complex64) -> Result<Complex64> {
    check_alpha(alpha)?;
    check_finite(s)?;
    if s.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let sum = kummer_series(alpha, s)?;
    Ok((s.ln() * alpha - s).exp() * sum / alpha)
}

/// `Σ_n s^n / ((α+1) ⋯ (α+n))`, i.e. `M(1, α+1, s)`.
fn kummer_series(alpha: f64, s: Complex64) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for n in 1..MAX_ITERATIONS {
        term *= s / (alpha + n as f64);
        sum += term;
        if term.norm() <= f64::EPSILON * 0.5 * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::Convergence {
        what: "incomplete gamma series",
        iterations: MAX_ITERATIONS,
    })
}

/// Upper incomplete gamma `Γ(α, s)` by the modified Lentz continued fraction.
pub fn upper_incomplete_gamma_cf(alpha: f64, s: Complex64) -> Result<Complex64> {
    check_alpha(alpha)?;
    check_finite(s)?;
    const TINY: f64 = 1e-300;
    let tiny = Complex64::new(TINY, 0.0);
    let mut b = s + (1.0 - alpha);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = if b.norm() < TINY { tiny.inv() } else { b.inv() };
    let mut h = d;
    for i in 1..MAX_ITERATIONS {
        let an = -(i as f64) * (i as f64 - alpha);
        b += 2.0;
        d = d * an + b;
        if d.norm() < TINY {
            d = tiny;
        }
        c = b + c.inv() * an;
        if c.norm() < TINY {
            c = tiny;
        }
        d = d.inv();
        let del = d * c;
        h *= del;
        if (del - 1.0).norm() < 2.0 * f64::EPSILON {
            return Ok((s.ln() * alpha - s).exp() * h);
        }
    }
    Err(Error::Convergence {
        what: "upper incomplete gamma continued fraction",
        iterations: MAX_ITERATIONS,
    })
}

/// Regularised lower incomplete gamma `P(α, x)` for real `x ≥ 0`.
pub fn regularized_lower_gamma(alpha: f64, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::domain(format!("P(α, x) requires x ≥ 0, got {x}")));
    }
    let g = lower_incomplete_gamma(alpha, Complex64::new(x, 0.0))?;
    Ok(g.re / ln_gamma_unchecked(alpha).exp())
}

/// Modified incomplete gamma `γ*(α, ρ) = ρ^{-α} γ(α, ρ) / Γ(α)`, an entire
/// function of `ρ`.
///
/// Near the origin (`|ρ| ≤ α + 1`) it is summed as `e^{-ρ} Σ ρ^n / Γ(α+n+1)`,
/// so `γ*(α, 0) = 1/Γ(α+1)` exactly. Outside, the quotient form is used.
pub fn gamma_star(alpha: f64, rho: Complex64) -> Result<Complex64> {
    check_alpha(alpha)?;
    check_finite(rho)?;
    let lead = (-ln_gamma_unchecked(alpha + 1.0)).exp();
    if rho.norm() <= alpha + SWITCHOVER_OFFSET {
        if rho.norm() == 0.0 {
            return Ok(Complex64::new(lead, 0.0));
        }
        let sum = kummer_series(alpha, rho)?;
        return Ok((-rho).exp() * sum * lead);
    }
    let lower = lower_incomplete_gamma(alpha, rho)?;
    Ok((-(rho.ln() * alpha) - ln_gamma_unchecked(alpha)).exp() * lower)
}

/// `ln ϑ_λ(η)²` from `|Γ((λ+2)/2 + iη)|² e^{πη} / (π Γ(λ+2))`.
pub fn ln_vartheta_sq(lambda: WeightParameter, eta: f64) -> Result<f64> {
    let l = lambda.value();
    Ok(ln_abs_gamma_sq(0.5 * (l + 2.0), eta)? - PI.ln() - ln_gamma_unchecked(l + 2.0) + PI * eta)
}

/// The hyperbolic weight `ϑ_λ(η)`.
pub fn vartheta(lambda: WeightParameter, eta: f64) -> Result<f64> {
    Ok((0.5 * ln_vartheta_sq(lambda, eta)?).exp())
}
