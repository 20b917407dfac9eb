//! Coherent-state forms on the weighted upper half-plane.
//!
//! The test functions are `f_μ(z) = √Γ(λ+2) (μ - iz)^{-(λ+2)}`, whose
//! transforms are `ξ^{(λ+1)/2} e^{-μξ}`; in particular
//! `⟨f_μ, f_ν⟩ = Γ(λ+2) / (μ+ν)^{λ+2}`.
//!
//! Each `x`-line integral runs over a window `|x| ≤ X(y)` with
//! `X(y) = (y + min(μ,ν)) tol^{-1/(2λ+3)}`, so the analytic tail bound
//! `2 Γ(λ+2) (2y)^λ X^{-(2λ+3)} / (2λ+3)` is a relative `tol` of the line
//! value. The height integral maps `y = c t/(1-t)` onto a Jacobi rule with
//! weight `t^λ (1-t)^{λ+1}`, which matches the line value's
//! `y^{-(2λ+3)}` decay.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{falling, leibniz, FormComparison, OracleValue, Settings, Tracker};
use crate::error::{Error, Result};
use crate::quadrature::{
    adaptive_integrate_with, integrate_panel, AdaptiveOptions, Panel, QuadValue,
};
use crate::quadrature::{rule, Family, MAX_LAGUERRE_ORDER};
use crate::specfun::{gamma, gamma_star, lower_incomplete_gamma, WeightParameter};
use crate::spectra::SpectralFunction;
use crate::symbols::{Geometry, SymbolSpec};

/// Default relative tolerance of the direct forms.
pub const FORM_TOL: f64 = 1e-9;

/// Relative agreement required of a normalization candidate.
pub const MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentState {
    mu: f64,
}

impl CoherentState {
    pub fn new(mu: f64) -> Result<Self> {
        if mu.is_finite() && mu > 0.0 {
            Ok(CoherentState { mu })
        } else {
            Err(Error::param(format!(
                "coherent parameter must be positive, got {mu}"
            )))
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `f_μ(z)`.
    pub fn eval(&self, lambda: WeightParameter, z: Complex64) -> Complex64 {
        let p = lambda.value() + 2.0;
        let base = Complex64::new(self.mu, 0.0) - Complex64::i() * z;
        base.powf(-p) * gamma(p).unwrap_or(f64::NAN).sqrt()
    }
}

fn window_factor(lambda: f64, tol: f64) -> f64 {
    tol.powf(-1.0 / (2.0 * lambda + 3.0))
}

/// `∫ ∂_y^m [(2y)^λ Γ(λ+2) (μ+y-ix)^{-(λ+2)} (ν+y+ix)^{-(λ+2)}] dx` over the
/// truncation window.
fn line_integral(
    lambda: f64,
    mu: f64,
    nu: f64,
    y: f64,
    order: u32,
    tol: f64,
) -> Result<(Complex64, bool)> {
    let p = lambda + 2.0;
    let g = gamma(p)?;
    let b = y + mu.min(nu);
    let half_width = b * window_factor(lambda, tol);
    let scale =
        g * (2.0 * y).powf(lambda) * b.powf(1.0 - 2.0 * p) * (1.0 / b + 1.0 / y).powi(order as i32);
    let weight = |i: u32| 2f64.powf(lambda) * falling(lambda, i) * y.powf(lambda - i as f64);
    let f = |x: f64| {
        let left = Complex64::new(mu + y, -x);
        let right = Complex64::new(nu + y, x);
        let w = |i: u32| Complex64::new(weight(i), 0.0);
        let l = |i: u32| left.powf(-p - i as f64) * falling(-p, i);
        let r = |i: u32| right.powf(-p - i as f64) * falling(-p, i);
        leibniz(order, &[&w, &l, &r]) * g
    };
    let e = adaptive_integrate_with(
        f,
        -half_width,
        half_width,
        AdaptiveOptions::absolute(tol * scale),
    )?;
    Ok((e.value, e.converged))
}

/// Tail bound of [`line_integral`] at order 0.
fn line_tail_bound(lambda: f64, mu: f64, nu: f64, y: f64, tol: f64) -> f64 {
    let p = lambda + 2.0;
    let x = (y + mu.min(nu)) * window_factor(lambda, tol);
    2.0 * gamma(p).unwrap_or(f64::NAN) * (2.0 * y).powf(lambda) * x.powf(1.0 - 2.0 * p)
        / (2.0 * p - 1.0)
}

/// `∫_0^∞ h(y) y^λ dy` for an `h` with `y^{-(2λ+3)}` decay, cut at the given
/// heights.
fn height_integral<T, F>(
    mut h: F,
    lambda: f64,
    scale: f64,
    cuts: &[f64],
    tol: f64,
) -> Result<(T, bool)>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let mut ts = vec![0.0];
    ts.extend(cuts.iter().map(|&y| y / (y + scale)));
    ts.push(1.0);
    let share = tol / (ts.len() - 1) as f64;
    let mut total = T::zero();
    let mut converged = true;
    for w in ts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let left = if a == 0.0 { lambda } else { 0.0 };
        let right = if b == 1.0 { lambda + 1.0 } else { 0.0 };
        let g = |t: f64| {
            let y = scale * t / (1.0 - t);
            // dy = c dt/(1-t)², y^λ = c^λ t^λ (1-t)^{-λ}
            let jac = scale.powf(lambda + 1.0) * (1.0 - t).powf(-lambda - 2.0);
            let carried = t.powf(lambda - left) * (1.0 - t).powf(-right);
            h(y) * (jac * carried)
        };
        let e = integrate_panel(g, Panel::new(a, b, left, right), share)?;
        total += e.value;
        converged &= e.converged;
    }
    Ok((total, converged))
}

/// `⟨a f_μ, f_ν⟩` computed on the half-plane.
pub fn parabolic_form_direct(
    symbol: &SymbolSpec,
    lambda: WeightParameter,
    mu: f64,
    nu: f64,
    tol: f64,
) -> Result<OracleValue> {
    if symbol.geometry() != Geometry::Parabolic {
        return Err(Error::GeometryMismatch {
            expected: Geometry::Parabolic,
            found: symbol.geometry(),
        });
    }
    CoherentState::new(mu)?;
    CoherentState::new(nu)?;
    let l = lambda.value();
    let p = l + 2.0;
    let norm = (l + 1.0) / std::f64::consts::PI;
    let size = gamma(p)? / (mu + nu).powf(p);
    let c = 0.5 * (mu + nu);
    let tracker = Tracker::new();
    let mut value = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    if !symbol.terms().is_empty() {
        // the line carries (2y)^λ, so divide out the y^λ the height rule supplies
        let re = |y: f64| {
            let a = tracker.record(symbol.eval_function_part(y).map(|v| (v, true)), f64::NAN);
            if a == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let line = tracker.record(
                line_integral(l, mu, nu, y, 0, tol),
                Complex64::new(f64::NAN, 0.0),
            );
            line * (a * norm * y.powf(-l))
        };
        let cuts = symbol.breakpoints();
        let (v, ok) = height_integral(re, l, c, &cuts, tol * size)?;
        if !ok {
            tracker.converged.set(false);
        }
        value += v;
        let (tb, _): (f64, bool) = height_integral(
            |y| {
                let a = symbol.eval_function_part(y).unwrap_or(0.0).abs();
                a * norm * line_tail_bound(l, mu, nu, y, tol) * y.powf(-l)
            },
            l,
            c,
            &cuts,
            tol * size,
        )?;
        tail += tb;
    }
    for d in symbol.deltas() {
        let y0 = d.loc();
        let line = tracker.record(
            line_integral(l, mu, nu, y0, d.order(), tol),
            Complex64::new(f64::NAN, 0.0),
        );
        let sign = if d.order() % 2 == 0 { 1.0 } else { -1.0 };
        value += line * (sign * d.coef() * norm);
        tail += d.coef().abs() * norm * line_tail_bound(l, mu, nu, y0, tol);
    }
    let converged = tracker.finish()?;
    let mut settings = Settings::new();
    settings.insert("tol".into(), tol);
    settings.insert("window_factor".into(), window_factor(l, tol));
    settings.insert("height_scale".into(), c);
    settings.insert("tail_bound".into(), tail);
    Ok(OracleValue {
        value,
        converged,
        settings,
    })
}

/// `∫_0^∞ γ(ξ) ξ^{λ+1} e^{-(μ+ν)ξ} dξ` by generalized Laguerre rules of
/// doubling order after `t = (μ+ν)ξ`.
pub fn parabolic_form_spectral(
    phi: &SpectralFunction,
    mu: f64,
    nu: f64,
    tol: f64,
) -> Result<OracleValue> {
    if phi.geometry() != Geometry::Parabolic {
        return Err(Error::GeometryMismatch {
            expected: Geometry::Parabolic,
            found: phi.geometry(),
        });
    }
    CoherentState::new(mu)?;
    CoherentState::new(nu)?;
    let l = phi.lambda().value();
    let s = mu + nu;
    let family = Family::GeneralizedLaguerre { lambda: l + 1.0 };
    let size = gamma(l + 2.0)? / s.powf(l + 2.0);
    let mut previous: Option<f64> = None;
    let mut n = 16;
    let mut all_converged = true;
    loop {
        let r = rule(family, n)?;
        let values: Vec<(f64, bool)> = r
            .nodes
            .par_iter()
            .map(|&t| phi.evaluate(t / s).map(|e| (e.value, e.converged)))
            .collect::<Result<_>>()?;
        all_converged &= values.iter().all(|v| v.1);
        let sum: f64 = r
            .weights
            .iter()
            .zip(&values)
            .map(|(w, v)| w * v.0)
            .sum::<f64>()
            / s.powf(l + 2.0);
        let settled = previous.is_some_and(|p| (sum - p).abs() <= tol * size);
        if settled || n >= MAX_LAGUERRE_ORDER {
            let mut settings = Settings::new();
            settings.insert("laguerre_order".into(), n as f64);
            settings.insert("tol".into(), tol);
            return Ok(OracleValue {
                value: Complex64::new(sum, 0.0),
                converged: settled && all_converged,
                settings,
            });
        }
        previous = Some(sum);
        n = (2 * n).min(MAX_LAGUERRE_ORDER);
    }
}

/// Direct `⟨f_μ, f_ν⟩` against `Γ(λ+2)/(μ+ν)^{λ+2}`.
pub fn unitarity_check_parabolic(
    lambda: WeightParameter,
    mu: f64,
    nu: f64,
) -> Result<FormComparison> {
    let one = SymbolSpec::constant(Geometry::Parabolic, 1.0)?;
    let direct = parabolic_form_direct(&one, lambda, mu, nu, FORM_TOL)?;
    let p = lambda.value() + 2.0;
    let exact = gamma(p)? / (mu + nu).powf(p);
    Ok(FormComparison::new(
        direct.value,
        Complex64::new(exact, 0.0),
        direct.converged,
        direct.settings,
    ))
}

fn check_half_plane(z: Complex64, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() && z.im > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what} = {z} is not in the upper half-plane"
        )))
    }
}

/// The resolution-of-identity kernel in both of its closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelForms {
    /// `u^{-(λ+2)} γ(λ+2, uη) / Γ(λ+2)` with `u = -i(z - ζ̄)`.
    pub incomplete_gamma: Complex64,
    /// `η^{λ+2} γ*(λ+2, uη)`.
    pub modified: Complex64,
}

fn kernel_argument(z: Complex64, zeta: Complex64) -> Complex64 {
    -Complex64::i() * (z - zeta.conj())
}

/// Kernel of the spectral projection of `(0, eta_cut)`, via `γ*`.
pub fn resolution_kernel_parabolic(
    lambda: WeightParameter,
    eta_cut: f64,
    z: Complex64,
    zeta: Complex64,
) -> Result<Complex64> {
    check_half_plane(z, "z")?;
    check_half_plane(zeta, "ζ")?;
    if !(eta_cut.is_finite() && eta_cut > 0.0) {
        return Err(Error::param(format!(
            "spectral cut must be positive, got {eta_cut}"
        )));
    }
    let p = lambda.value() + 2.0;
    let u = kernel_argument(z, zeta);
    Ok(gamma_star(p, u * eta_cut)? * eta_cut.powf(p))
}

pub fn resolution_kernel_forms(
    lambda: WeightParameter,
    eta_cut: f64,
    z: Complex64,
    zeta: Complex64,
) -> Result<KernelForms> {
    let modified = resolution_kernel_parabolic(lambda, eta_cut, z, zeta)?;
    let p = lambda.value() + 2.0;
    let u = kernel_argument(z, zeta);
    let incomplete_gamma = u.powf(-p) * lower_incomplete_gamma(p, u * eta_cut)? / gamma(p)?;
    Ok(KernelForms {
        incomplete_gamma,
        modified,
    })
}

/// `∫ E(z, ζ) f_μ(ζ) dν_λ(ζ)` by quadrature in `ζ`, against
/// `√Γ(λ+2) (μ - iz)^{-(λ+2)} γ(λ+2, (μ - iz)η) / Γ(λ+2)`.
pub fn resolution_apply_check(
    lambda: WeightParameter,
    eta_cut: f64,
    mu: f64,
    z: Complex64,
) -> Result<FormComparison> {
    let state = CoherentState::new(mu)?;
    check_half_plane(z, "z")?;
    let l = lambda.value();
    let p = l + 2.0;
    let tol = 1e-8;
    let gp = gamma(p)?;
    let w = Complex64::new(mu, 0.0) - Complex64::i() * z;
    let exact = w.powf(-p) * lower_incomplete_gamma(p, w * eta_cut)? / gp.sqrt();
    let size = state.eval(lambda, z).norm();
    let norm = (l + 1.0) / std::f64::consts::PI;
    let t_factor = window_factor(l, tol);
    let tracker = Tracker::new();
    let line = |yp: f64| -> Result<(Complex64, bool)> {
        let b = mu.min(z.im) + yp;
        let half_width = (mu + z.im + yp) * t_factor;
        let lo = z.re.min(0.0) - half_width;
        let hi = z.re.max(0.0) + half_width;
        let scale = gp.sqrt() * b.powf(1.0 - 2.0 * p);
        let f = |xp: f64| {
            let zeta = Complex64::new(xp, yp);
            let k = resolution_kernel_parabolic(lambda, eta_cut, z, zeta)
                .unwrap_or(Complex64::new(f64::NAN, 0.0));
            k * state.eval(lambda, zeta)
        };
        let e = adaptive_integrate_with(f, lo, hi, AdaptiveOptions::absolute(tol * scale))?;
        Ok((e.value, e.converged))
    };
    let c = 0.5 * (mu + z.im);
    let h = |yp: f64| {
        let v = tracker.record(line(yp), Complex64::new(f64::NAN, 0.0));
        v * (norm * 2f64.powf(l) * yp.powf(l)) * yp.powf(-l)
    };
    let (v, ok) = height_integral(h, l, c, &[], tol * size)?;
    let converged = tracker.finish()? && ok;
    let mut settings = Settings::new();
    settings.insert("eta_cut".into(), eta_cut);
    settings.insert("mu".into(), mu);
    settings.insert("tol".into(), tol);
    settings.insert("window_factor".into(), t_factor);
    Ok(FormComparison::new(v, exact, converged, settings))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizationCandidate {
    pub name: String,
    pub prefactor: f64,
    /// Spectral side `∫ γ_1 ξ^{λ+1} e^{-(μ+ν)ξ} dξ` under this prefactor.
    pub spectral: f64,
    pub rel_err: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizationReport {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub direct: f64,
    pub candidates: Vec<NormalizationCandidate>,
    /// Names of the matching candidates.
    pub matching: Vec<String>,
}

impl NormalizationReport {
    /// True when exactly one candidate matches and it is `name`.
    pub fn only(&self, name: &str) -> bool {
        self.matching.len() == 1 && self.matching[0] == name
    }
}

pub const GAMMA_PREFACTOR: &str = "1/Gamma(lambda+1)";
pub const SQRT_GAMMA_PREFACTOR: &str = "1/sqrt(Gamma(lambda+1))";

/// Direct `⟨1 f_1, f_2⟩` against the spectral side built with either
/// candidate prefactor of the vertical spectral function.
pub fn normalization_probe(lambda: WeightParameter) -> Result<NormalizationReport> {
    let (mu, nu) = (1.0, 2.0);
    let l = lambda.value();
    let one = SymbolSpec::constant(Geometry::Parabolic, 1.0)?;
    let direct = parabolic_form_direct(&one, lambda, mu, nu, FORM_TOL)?;
    // ∫ t^λ e^{-t} dt and ∫ t^{λ+1} e^{-t} dt by quadrature
    let mass = |a: f64| -> Result<f64> {
        let mut f = |_t: f64| 1.0;
        laguerre_sum(&mut f, a)
    };
    let kernel_mass = mass(l)?;
    let form_mass = mass(l + 1.0)? / (mu + nu).powf(l + 2.0);
    let g = gamma(l + 1.0)?;
    let candidates: Vec<NormalizationCandidate> = [
        (GAMMA_PREFACTOR, 1.0 / g),
        (SQRT_GAMMA_PREFACTOR, 1.0 / g.sqrt()),
    ]
    .iter()
    .map(|&(name, prefactor)| {
        let spectral = prefactor * kernel_mass * form_mass;
        let rel_err = (direct.value.re - spectral).abs() / spectral.abs();
        NormalizationCandidate {
            name: name.into(),
            prefactor,
            spectral,
            rel_err,
            matches: rel_err <= MATCH_TOL,
        }
    })
    .collect();
    let matching = candidates
        .iter()
        .filter(|c| c.matches)
        .map(|c| c.name.clone())
        .collect();
    Ok(NormalizationReport {
        lambda: l,
        mu,
        nu,
        direct: direct.value.re,
        candidates,
        matching,
    })
}

fn laguerre_sum<F: FnMut(f64) -> f64>(f: &mut F, lambda: f64) -> Result<f64> {
    let r = rule(Family::GeneralizedLaguerre { lambda }, 32)?;
    Ok(r.nodes
        .iter()
        .zip(&r.weights)
        .map(|(&t, &w)| w * f(t))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{spectral_function, SpectralOptions};

    fn lam(l: f64) -> WeightParameter {
        WeightParameter::new(l).unwrap()
    }

    fn sym(text: &str) -> SymbolSpec {
        SymbolSpec::parse(Geometry::Parabolic, text).unwrap()
    }

    #[test]
    fn coherent_inner_products() {
        let c = unitarity_check_parabolic(lam(0.0), 1.0, 1.0).unwrap();
        assert!(c.converged);
        assert!((c.direct.re - 0.25).abs() < 1e-9, "{}", c.direct);
        let c = unitarity_check_parabolic(lam(1.0), 1.0, 2.0).unwrap();
        // window truncation plus quadrature tolerance
        let budget = c.settings["tail_bound"] + FORM_TOL * 2.0 / 27.0;
        assert!((c.direct.re - 2.0 / 27.0).abs() <= budget, "{c:?}");
        assert!(c.direct.im.abs() < 1e-12);
        let c = unitarity_check_parabolic(lam(2.5), 0.7, 1.9).unwrap();
        assert!(c.within(1e-6), "{c:?}");
        assert!(c.settings["tail_bound"] < 1e-8);
    }

    #[test]
    fn delta_form_value() {
        // 2 Γ(3) / 4³
        let d = parabolic_form_direct(&sym("delta:loc=1"), lam(0.0), 1.0, 1.0, FORM_TOL).unwrap();
        assert!((d.value.re - 0.0625).abs() < 1e-9, "{}", d.value);
    }

    #[test]
    fn delta_derivative_form_matches_spectral_side() {
        // -(d/dy) at y0 = 0.8: spectral side ∫ γ ξ^{λ+1} e^{-(μ+ν)ξ} with the
        // closed form γ(ξ) = d/dy[(2ξ)^{λ+1} y^λ e^{-2ξy}]/Γ(λ+1) at y0
        let s = sym("delta_derivative:order=1,loc=0.8");
        let d = parabolic_form_direct(&s, lam(1.0), 1.0, 1.5, FORM_TOL).unwrap();
        let phi = spectral_function(&s, lam(1.0), &[], SpectralOptions::default()).unwrap();
        let e = parabolic_form_spectral(&phi, 1.0, 1.5, 1e-10).unwrap();
        assert!(
            (d.value - e.value).norm() < 1e-7 * e.value.norm(),
            "{} vs {}",
            d.value,
            e.value
        );
    }

    #[test]
    fn indicator_form_matches_spectral_side() {
        let s = sym("indicator:0,1");
        let d = parabolic_form_direct(&s, lam(0.0), 1.0, 2.0, FORM_TOL).unwrap();
        let phi = spectral_function(&s, lam(0.0), &[], SpectralOptions::default()).unwrap();
        let e = parabolic_form_spectral(&phi, 1.0, 2.0, 1e-10).unwrap();
        assert!(d.converged && e.converged);
        assert!((d.value - e.value).norm() < 1e-5 * e.value.norm());
    }

    #[test]
    fn spectral_side_of_unit_symbol() {
        let phi = spectral_function(
            &sym("constant:1"),
            lam(1.0),
            &[],
            SpectralOptions::default(),
        )
        .unwrap();
        let e = parabolic_form_spectral(&phi, 1.0, 1.0, 1e-12).unwrap();
        assert!((e.value.re - gamma(3.0).unwrap() / 8.0).abs() < 1e-11);
    }

    #[test]
    fn kernel_forms_agree() {
        for &(l, eta) in &[(0.0, 0.5), (0.0, 2.0), (1.5, 10.0), (-0.5, 0.01)] {
            for (z, zeta) in [
                (Complex64::new(0.0, 1.0), Complex64::new(0.3, 0.2)),
                (Complex64::new(1.0, 1.0), Complex64::new(-4.0, 3.0)),
                (Complex64::new(-2.0, 0.1), Complex64::new(7.0, 0.05)),
            ] {
                let k = resolution_kernel_forms(lam(l), eta, z, zeta).unwrap();
                assert!(
                    (k.incomplete_gamma - k.modified).norm() <= 1e-10 * k.modified.norm(),
                    "λ={l} η={eta} z={z} ζ={zeta}"
                );
            }
        }
    }

    #[test]
    fn kernel_reproduces_bergman_kernel_for_large_cut() {
        // E → (i/(z - ζ̄))^{λ+2}
        let (z, zeta) = (Complex64::new(0.2, 1.0), Complex64::new(-0.5, 0.7));
        let k = resolution_kernel_parabolic(lam(0.0), 200.0, z, zeta).unwrap();
        let bergman = (Complex64::i() / (z - zeta.conj())).powf(2.0);
        assert!((k - bergman).norm() < 1e-12);
    }

    #[test]
    fn kernel_rejects_lower_half_plane() {
        assert!(resolution_kernel_parabolic(
            lam(0.0),
            1.0,
            Complex64::new(0.0, -1.0),
            Complex64::i()
        )
        .is_err());
        assert!(
            resolution_kernel_parabolic(lam(0.0), 0.0, Complex64::i(), Complex64::i()).is_err()
        );
    }

    #[test]
    fn resolution_applied_to_coherent_state() {
        let c = resolution_apply_check(lam(0.0), 2.0, 1.0, Complex64::i()).unwrap();
        assert!(c.within(1e-5), "{c:?}");
    }

    #[test]
    fn probe_distinguishes_prefactors() {
        let r = normalization_probe(lam(2.5)).unwrap();
        assert!(r.only(GAMMA_PREFACTOR), "{r:?}");
        let r = normalization_probe(lam(0.0)).unwrap();
        assert_eq!(r.matching.len(), 2);
    }
}
