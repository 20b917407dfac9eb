//! `φ(η) = (1/Γ(λ+1)) ∫_0^∞ a(t/(2η)) t^λ e^{-t} dt`, equivalently
//! `(2η)^{λ+1}/Γ(λ+1) ∫_0^∞ a(s) s^λ e^{-2ηs} ds`.

use super::derivatives;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_panel, rule, Estimate, Family, Panel, MAX_LAGUERRE_ORDER};
use crate::specfun::{ln_gamma_unchecked, WeightParameter};
use crate::symbols::{FunctionTerm, SymbolSpec};

/// Spacing of the extra panel cuts in `t` below [`cutoff`].
const GRADING: f64 = 32.0;

/// Beyond this `t` the weight `t^λ e^{-t}` is below `e^{-100}`.
fn cutoff(lambda: f64) -> f64 {
    100.0 + 2.0 * lambda.abs()
}

/// `∫_0^∞ f(t) t^{ex} e^{-t} dt` by generalized Laguerre rules, doubling the
/// order until two orders agree.
fn laguerre(mut f: impl FnMut(f64) -> f64, ex: f64, tol: f64) -> Result<Estimate<f64>> {
    let apply = |f: &mut dyn FnMut(f64) -> f64, n: usize| -> Result<f64> {
        let r = rule(Family::GeneralizedLaguerre { lambda: ex }, n)?;
        Ok(r.nodes
            .iter()
            .zip(&r.weights)
            .map(|(&t, &w)| w * f(t))
            .sum())
    };
    let mut n = 8;
    let mut prev = apply(&mut f, n)?;
    loop {
        n = (2 * n).min(MAX_LAGUERRE_ORDER);
        let next = apply(&mut f, n)?;
        let error = (next - prev).abs();
        if error <= tol || n == MAX_LAGUERRE_ORDER {
            return Ok(Estimate {
                value: next,
                error,
                converged: error <= tol,
            });
        }
        prev = next;
    }
}

/// `∫_{t_lo}^{t_hi} smooth(t) t^{λ+extra} e^{-t} dt`; `extra` only matters when
/// the range starts at `0`, `t_hi` may be infinite, `cuts` are interior kinks.
fn weighted(
    smooth: &dyn Fn(f64) -> f64,
    t_lo: f64,
    t_hi: f64,
    cuts: &[f64],
    lambda: f64,
    extra: f64,
    tol: f64,
) -> Result<Estimate<f64>> {
    let ex = lambda + extra;
    let top = cutoff(lambda);
    let mut pts = vec![t_lo];
    pts.extend(cuts.iter().copied().filter(|&c| c > t_lo && c < t_hi));
    let mut g = GRADING;
    while g < top.min(t_hi) {
        if g > t_lo {
            pts.push(g);
        }
        g += GRADING;
    }
    if t_hi.is_finite() {
        pts.push(t_hi);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    // a bare [0, ∞) range is a single Laguerre rule
    if pts.len() == 1 && t_lo == 0.0 && cuts.is_empty() {
        return laguerre(smooth, ex, tol);
    }
    let pieces = pts.len() as f64;
    let share = tol / pieces;
    let mut total = Estimate::zero();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let est = if a == 0.0 {
            integrate_panel(
                |t: f64| smooth(t) * (-t).exp(),
                Panel::new(a, b, ex, 0.0),
                share,
            )?
        } else {
            integrate_panel(
                |t: f64| smooth(t) * (ex * t.ln() - t).exp(),
                Panel::smooth(a, b),
                share,
            )?
        };
        total = total.combine(est);
    }
    if !t_hi.is_finite() {
        let start = *pts.last().unwrap();
        let tail = if start == 0.0 {
            laguerre(smooth, ex, share)?
        } else {
            let shift = (-start).exp();
            if shift == 0.0 {
                Estimate::zero()
            } else {
                laguerre(
                    |v| smooth(start + v) * (ex * (start + v).ln()).exp(),
                    0.0,
                    share / shift,
                )?
                .scale(shift)
            }
        };
        total = total.combine(tail);
    }
    Ok(total)
}

fn term_integral(
    term: &FunctionTerm,
    eta: f64,
    lambda: f64,
    tol: f64,
    cuts_t: &[f64],
) -> Result<Estimate<f64>> {
    let two_eta = 2.0 * eta;
    let per = |c: f64| tol / c.abs().max(1e-300);
    match *term {
        FunctionTerm::Constant { value } => Ok(laguerre(|_| 1.0, lambda, per(value))?.scale(value)),
        FunctionTerm::Indicator { lo, hi, coef } => Ok(weighted(
            &|_| 1.0,
            two_eta * lo,
            two_eta * hi,
            &[],
            lambda,
            0.0,
            per(coef),
        )?
        .scale(coef)),
        FunctionTerm::Power { exp, coef } => {
            if !(lambda + exp > -1.0) {
                return Err(Error::domain(format!(
                    "y^{exp} is not integrable at y = 0 for λ = {lambda}"
                )));
            }
            let scale = coef * two_eta.powf(-exp);
            Ok(laguerre(|_| 1.0, lambda + exp, per(scale))?.scale(scale))
        }
        FunctionTerm::Custom { ref f, .. } => weighted(
            &|t| f(t / two_eta),
            0.0,
            f64::INFINITY,
            cuts_t,
            lambda,
            0.0,
            tol,
        ),
        FunctionTerm::OscRadial { .. } | FunctionTerm::OscAngular { .. } => {
            unreachable!("rejected at symbol construction")
        }
    }
}

/// One value `φ(η)`, `η > 0`.
pub fn value(
    symbol: &SymbolSpec,
    lambda: WeightParameter,
    eta: f64,
    tol: f64,
) -> Result<Estimate<f64>> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::domain(format!(
            "parabolic spectral parameter must be > 0, got {eta}"
        )));
    }
    let l = lambda.value();
    let ln_c = -ln_gamma_unchecked(l + 1.0);
    let cuts: Vec<f64> = symbol.breakpoints().iter().map(|y| 2.0 * eta * y).collect();
    let n_terms = symbol.terms().len().max(1) as f64;
    let abs_tol = tol * (-ln_c).exp() / n_terms;
    let mut total = Estimate::zero();
    for term in symbol.terms() {
        total = total.combine(term_integral(term, eta, l, abs_tol, &cuts)?);
    }
    let mut out = total.scale(ln_c.exp());
    let ln_pre = ln_c + (l + 1.0) * (2.0 * eta).ln();
    for d in symbol.deltas() {
        let sign = if d.order() % 2 == 0 { 1.0 } else { -1.0 };
        out.value +=
            sign * d.coef() * derivatives::parabolic_kernel(l, eta, d.order(), d.loc(), ln_pre);
    }
    Ok(out)
}
