//! `γ(k) = Γ(k+λ+2)/(Γ(k+1)Γ(λ+1)) ∫_0^1 a(√r) r^k (1-r)^λ dr`.

use super::derivatives;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_panels, sine_tail, Estimate, Panel, TailOptions};
use crate::specfun::{ln_gamma_ratio_elliptic, WeightParameter};
use crate::symbols::{FunctionTerm, SymbolSpec};

/// Width (in units of `1/k`) of the panel next to `r = 1` once `k > 64`; the
/// kernel `r^k` has decayed to `e^{-32}` at its inner edge.
const GRADING: f64 = 32.0;

/// Split `[lo, hi] ⊂ [0, 1]` at `cuts`, attaching the weight exponents:
/// `left` at `r = 0` and `λ` at `r = 1`.
fn radial_panels(lo: f64, hi: f64, cuts: &[f64], k: u64, left: f64, lambda: f64) -> Vec<Panel> {
    let mut pts = vec![lo];
    let grade = if k > 64 {
        Some(1.0 - GRADING / k as f64)
    } else {
        None
    };
    for &c in cuts.iter().chain(grade.iter()) {
        if c > lo && c < hi {
            pts.push(c);
        }
    }
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2)
        .map(|w| {
            let l = if w[0] == 0.0 { left } else { 0.0 };
            let r = if w[1] == 1.0 { lambda } else { 0.0 };
            Panel::new(w[0], w[1], l, r)
        })
        .collect()
}

/// `∫ smooth(r) r^{k} (1-r)^λ dr` over `panels`, with the weight exponents of
/// each panel already folded into the rule.
fn weighted(
    smooth: impl Fn(f64) -> f64,
    panels: &[Panel],
    k: u64,
    lambda: f64,
    tol: f64,
) -> Result<Estimate<f64>> {
    let kf = k as f64;
    let mut total = Estimate::zero();
    let share = tol / panels.len().max(1) as f64;
    for p in panels {
        let touches_one = p.right != 0.0 || p.b == 1.0;
        let f = |r: f64| {
            let mut v = smooth(r) * if k == 0 { 1.0 } else { (kf * r.ln()).exp() };
            if !touches_one {
                v *= (lambda * (-r).ln_1p()).exp();
            }
            v
        };
        total = total.combine(integrate_panels(f, &[*p], share)?);
    }
    Ok(total)
}

fn term_integral(
    term: &FunctionTerm,
    k: u64,
    lambda: f64,
    tol: f64,
    cuts: &[f64],
) -> Result<Estimate<f64>> {
    match *term {
        FunctionTerm::Constant { value } => {
            let panels = radial_panels(0.0, 1.0, &[], k, 0.0, lambda);
            Ok(weighted(|_| 1.0, &panels, k, lambda, tol / value.abs().max(1e-300))?.scale(value))
        }
        FunctionTerm::Indicator { lo, hi, coef } => {
            let panels = radial_panels(lo * lo, hi * hi, &[], k, 0.0, lambda);
            Ok(weighted(|_| 1.0, &panels, k, lambda, tol / coef.abs().max(1e-300))?.scale(coef))
        }
        FunctionTerm::Power { exp, coef } => {
            let half = 0.5 * exp;
            if !(half > -1.0) {
                return Err(Error::domain(format!("ρ^{exp} is not integrable at ρ = 0")));
            }
            let panels = radial_panels(0.0, 1.0, &[], k, half, lambda);
            // the first panel carries r^{p/2}; later panels need it explicitly
            let first_end = panels[0].b;
            let smooth = |r: f64| if r < first_end { 1.0 } else { r.powf(half) };
            Ok(weighted(smooth, &panels, k, lambda, tol / coef.abs().max(1e-300))?.scale(coef))
        }
        FunctionTerm::OscRadial { beta, alpha, coef } => {
            osc_radial(beta, alpha, k, lambda, tol / coef.abs()).map(|e| e.scale(coef))
        }
        FunctionTerm::Custom { ref f, .. } => {
            let rs: Vec<f64> = cuts.iter().map(|c| c * c).collect();
            let panels = radial_panels(0.0, 1.0, &rs, k, 0.0, lambda);
            weighted(|r| f(r.sqrt()), &panels, k, lambda, tol)
        }
        FunctionTerm::OscAngular { .. } => unreachable!("rejected at symbol construction"),
    }
}

/// `∫_0^1 (1-r)^{λ-β} sin((1-r)^{-α}) r^k dr`: smooth panels on `r ≤ 1/2`,
/// and on `u = 1-r ≤ 1/2` the substitution `t = u^{-α}` makes it a sine
/// integral with amplitude `(1/α) t^{(β-λ-1)/α-1} (1-t^{-1/α})^k`.
fn osc_radial(beta: f64, alpha: f64, k: u64, lambda: f64, tol: f64) -> Result<Estimate<f64>> {
    if !(beta < lambda + 1.0 + alpha) {
        return Err(Error::domain(format!(
            "osc_radial(β={beta}, α={alpha}) does not decay fast enough for λ = {lambda}"
        )));
    }
    let kf = k as f64;
    let inner = radial_panels(0.0, 0.5, &[], 0, 0.0, lambda);
    let head = weighted(
        |r| {
            let u = 1.0 - r;
            u.powf(-beta) * u.powf(-alpha).sin()
        },
        &inner,
        k,
        lambda,
        0.5 * tol,
    )?;
    let expo = (beta - lambda - 1.0) / alpha - 1.0;
    let amplitude = |t: f64| {
        let u = t.powf(-1.0 / alpha);
        let ln = expo * t.ln() + if k == 0 { 0.0 } else { kf * (-u).ln_1p() };
        ln.exp() / alpha
    };
    let tail = sine_tail(amplitude, 2f64.powf(alpha), TailOptions::new(0.5 * tol))?;
    Ok(head.combine(tail))
}

/// One value `γ(k)` with its quadrature estimate.
pub fn value(
    symbol: &SymbolSpec,
    lambda: WeightParameter,
    k: u64,
    tol: f64,
) -> Result<Estimate<f64>> {
    let l = lambda.value();
    let ln_norm = ln_gamma_ratio_elliptic(k, lambda);
    let norm = ln_norm.exp();
    let cuts = symbol.breakpoints();
    let n_terms = symbol.terms().len().max(1) as f64;
    let abs_tol = tol / norm / n_terms;
    let mut total = Estimate::zero();
    for term in symbol.terms() {
        total = total.combine(term_integral(term, k, l, abs_tol, &cuts)?);
    }
    let mut out = total.scale(norm);
    for d in symbol.deltas() {
        let sign = if d.order() % 2 == 0 { 1.0 } else { -1.0 };
        let v = derivatives::elliptic_kernel(k, l, d.order(), d.loc(), ln_norm);
        out.value += sign * d.coef() * v;
    }
    Ok(out)
}
