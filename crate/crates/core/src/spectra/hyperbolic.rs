//! `γ(η) = 2^λ (λ+1) ϑ_λ(η)² ∫_0^π a(θ) e^{-2ηθ} sin^λ θ dθ`.
//!
//! `ϑ_λ(η)²` grows like `e^{πη}` on one side while the integral decays
//! like `e^{-2ηπ}` on the other, so the whole evaluation runs in log space:
//! the integrand is scaled by `e^{-M}`, `M = max(0, -2ηπ)` (its peak), and
//! `M` is added back to `ln ϑ²` before exponentiating.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use super::derivatives;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_panel, sine_tail, Estimate, Panel, TailOptions};
use crate::specfun::{ln_abs_gamma_sq, ln_gamma_unchecked, ln_vartheta_sq, WeightParameter};
use crate::symbols::{FunctionTerm, SymbolSpec};

struct Kernel {
    eta: f64,
    lambda: f64,
    peak: f64,
}

impl Kernel {
    fn new(eta: f64, lambda: f64) -> Self {
        Kernel {
            eta,
            lambda,
            peak: (-2.0 * eta * PI).max(0.0),
        }
    }

    /// `e^{-2ηθ - M}`.
    fn exp_part(&self, theta: f64) -> f64 {
        (-2.0 * self.eta * theta - self.peak).exp()
    }

    /// `sin^λ θ` divided by `θ^λ` and/or `(π-θ)^λ` when those are carried by
    /// the rule.
    fn sine_part(&self, theta: f64, at_zero: bool, at_pi: bool) -> f64 {
        let l = self.lambda;
        if l == 0.0 {
            return 1.0;
        }
        let d = PI - theta;
        let s = if theta <= FRAC_PI_2 {
            theta.sin()
        } else {
            d.sin()
        };
        let mut ln = l * s.ln();
        if at_zero {
            ln -= l * theta.ln();
        }
        if at_pi {
            ln -= l * d.ln();
        }
        ln.exp()
    }

    /// Panel cuts concentrating at the kernel peak: `2^j/(2|η|)` from the
    /// peak end.
    fn grading(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        let a = self.eta.abs();
        if a == 0.0 {
            return pts;
        }
        let mut h = 1.0 / (2.0 * a);
        while h < PI {
            pts.push(if self.eta > 0.0 { h } else { PI - h });
            h *= 2.0;
        }
        pts
    }

    /// `∫_lo^hi smooth(θ) θ^{extra} e^{-2ηθ-M} sin^λθ dθ` (`extra` applies at
    /// `θ = 0` only).
    fn integrate(
        &self,
        smooth: &dyn Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        cuts: &[f64],
        extra: f64,
        tol: f64,
    ) -> Result<Estimate<f64>> {
        let mut pts = vec![lo, hi];
        pts.extend(
            cuts.iter()
                .chain(self.grading().iter())
                .copied()
                .filter(|&c| c > lo && c < hi),
        );
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let share = tol / (pts.len() - 1) as f64;
        let mut total = Estimate::zero();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let at_zero = a == 0.0;
            let at_pi = b == PI;
            let left = if at_zero { self.lambda + extra } else { 0.0 };
            let right = if at_pi { self.lambda } else { 0.0 };
            let f = |t: f64| {
                let mut v = smooth(t) * self.exp_part(t) * self.sine_part(t, at_zero, at_pi);
                if !at_zero && extra != 0.0 {
                    v *= t.powf(extra);
                }
                v
            };
            total = total.combine(integrate_panel(f, Panel::new(a, b, left, right), share)?);
        }
        Ok(total)
    }
}

fn osc_angular(kernel: &Kernel, beta: f64, alpha: f64, tol: f64) -> Result<Estimate<f64>> {
    let l = kernel.lambda;
    if !(beta < l + 1.0 + alpha) {
        return Err(Error::domain(format!(
            "osc_angular(β={beta}, α={alpha}) does not decay fast enough for λ = {l}"
        )));
    }
    let upper = kernel.integrate(
        &|t: f64| t.powf(-beta) * t.powf(-alpha).sin(),
        FRAC_PI_2,
        PI,
        &[],
        0.0,
        0.5 * tol,
    )?;
    // θ = t^{-1/α} on (0, π/2]
    let amplitude = |t: f64| {
        let th = t.powf(-1.0 / alpha);
        let ln =
            -beta * th.ln() + (-1.0 / alpha - 1.0) * t.ln() - 2.0 * kernel.eta * th - kernel.peak
                + if l == 0.0 { 0.0 } else { l * th.sin().ln() };
        ln.exp() / alpha
    };
    let lower = sine_tail(
        amplitude,
        FRAC_PI_2.powf(-alpha),
        TailOptions::new(0.5 * tol),
    )?;
    Ok(upper.combine(lower))
}

fn term_integral(
    kernel: &Kernel,
    term: &FunctionTerm,
    cuts: &[f64],
    tol: f64,
) -> Result<Estimate<f64>> {
    let per = |c: f64| tol / c.abs().max(1e-300);
    match *term {
        FunctionTerm::Constant { value } => Ok(kernel
            .integrate(&|_| 1.0, 0.0, PI, &[], 0.0, per(value))?
            .scale(value)),
        FunctionTerm::Indicator { lo, hi, coef } => Ok(kernel
            .integrate(&|_| 1.0, lo, hi, &[], 0.0, per(coef))?
            .scale(coef)),
        FunctionTerm::Power { exp, coef } => {
            if !(kernel.lambda + exp > -1.0) {
                return Err(Error::domain(format!(
                    "θ^{exp} is not integrable at θ = 0 for λ = {}",
                    kernel.lambda
                )));
            }
            Ok(kernel
                .integrate(&|_| 1.0, 0.0, PI, &[], exp, per(coef))?
                .scale(coef))
        }
        FunctionTerm::OscAngular { beta, alpha, coef } => {
            Ok(osc_angular(kernel, beta, alpha, per(coef))?.scale(coef))
        }
        FunctionTerm::Custom { ref f, .. } => kernel.integrate(&|t| f(t), 0.0, PI, cuts, 0.0, tol),
        FunctionTerm::OscRadial { .. } => unreachable!("rejected at symbol construction"),
    }
}

/// `ln(2^λ (λ+1) ϑ_λ(η)²) + M`.
fn ln_normalizer(lambda: WeightParameter, eta: f64, peak: f64) -> Result<f64> {
    let l = lambda.value();
    Ok(l * LN_2 + (l + 1.0).ln() + ln_vartheta_sq(lambda, eta)? + peak)
}

/// One value `γ(η)`.
pub fn value(
    symbol: &SymbolSpec,
    lambda: WeightParameter,
    eta: f64,
    tol: f64,
) -> Result<Estimate<f64>> {
    if !eta.is_finite() {
        return Err(Error::domain(format!(
            "hyperbolic spectral parameter {eta} is not finite"
        )));
    }
    let kernel = Kernel::new(eta, lambda.value());
    let ln_norm = ln_normalizer(lambda, eta, kernel.peak)?;
    let norm = ln_norm.exp();
    let cuts = symbol.breakpoints();
    let n_terms = symbol.terms().len().max(1) as f64;
    let abs_tol = tol / norm / n_terms;
    let mut total = Estimate::zero();
    for term in symbol.terms() {
        total = total.combine(term_integral(&kernel, term, &cuts, abs_tol)?);
    }
    let mut out = total.scale(norm);
    for d in symbol.deltas() {
        let sign = if d.order() % 2 == 0 { 1.0 } else { -1.0 };
        let ln_scale = ln_norm - kernel.peak;
        out.value += sign
            * d.coef()
            * derivatives::hyperbolic_kernel(lambda.value(), eta, d.order(), d.loc(), ln_scale);
    }
    Ok(out)
}

/// The two closed forms of `γ(η)` for `a = δ(θ - π/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPiDeltaForms {
    /// `2^λ |Γ((λ+2)/2 + iη)|² / (π Γ(λ+1))`, which is what `ϑ_λ` gives.
    pub via_vartheta: f64,
    /// Same expression with `Γ((λ+1)/2 + iη)`.
    pub shifted_argument: f64,
}

pub fn half_pi_delta_forms(lambda: WeightParameter, eta: f64) -> Result<HalfPiDeltaForms> {
    let l = lambda.value();
    let base = l * LN_2 - PI.ln() - ln_gamma_unchecked(l + 1.0);
    Ok(HalfPiDeltaForms {
        via_vartheta: (base + ln_abs_gamma_sq(0.5 * (l + 2.0), eta)?).exp(),
        shifted_argument: (base + ln_abs_gamma_sq(0.5 * (l + 1.0), eta)?).exp(),
    })
}
