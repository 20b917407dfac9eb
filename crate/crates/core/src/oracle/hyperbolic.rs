//! Wave-packet forms for angular symbols.
//!
//! A Gaussian packet `g` in the transform variable is pulled back to the
//! half-plane; in logarithmic polar coordinates `z = e^{s+iθ}` its image is
//! proportional to `F(s, θ) = ∫ g(η) ϑ_λ(η) e^{-ηθ} e^{iηs} dη`, and
//! `⟨a f, f⟩ = 2^λ (λ+1)/(2π) ∫ ds ∫_0^π a(θ) sin^λθ |F(s, θ)|² dθ`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use super::{
    binomial, leibniz, sine_power_derivative, FormComparison, OracleValue, Settings, Tracker,
};
use crate::error::{Error, Result};
use crate::quadrature::{
    adaptive_integrate_with, integrate_panel, rule, AdaptiveOptions, Family, Panel,
};
use crate::specfun::{vartheta, WeightParameter};
use crate::spectra::SpectralFunction;
use crate::symbols::{Geometry, SymbolSpec};

/// Packet support is cut at this many widths from the center.
const SUPPORT_WIDTHS: f64 = 10.0;
const ETA_PANELS: usize = 16;
const NODES_PER_PANEL: usize = 16;

/// Normalized Gaussian `g(η) = (πσ²)^{-1/4} exp(-(η-η0)²/(2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WavePacket {
    center: f64,
    width: f64,
}

impl WavePacket {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !center.is_finite() || !(width.is_finite() && width > 0.0) {
            return Err(Error::param(format!(
                "packet needs a finite center and positive width, got ({center}, {width})"
            )));
        }
        Ok(WavePacket { center, width })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn eval(&self, eta: f64) -> f64 {
        let z = (eta - self.center) / self.width;
        (PI * self.width * self.width).powf(-0.25) * (-0.5 * z * z).exp()
    }

    fn support(&self) -> (f64, f64) {
        (
            self.center - SUPPORT_WIDTHS * self.width,
            self.center + SUPPORT_WIDTHS * self.width,
        )
    }

    /// Half-length of the `s` window, where `|F|²` has decayed like
    /// `exp(-σ² s²)`.
    pub fn s_window(&self) -> f64 {
        12f64.max(9.0 / self.width)
    }
}

/// Composite Gauss–Legendre nodes and weights on `[a, b]`.
fn composite(a: f64, b: f64, panels: usize, n: usize) -> Result<Vec<(f64, f64)>> {
    let r = rule(Family::Legendre, n)?;
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * n);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (&t, &w) in r.nodes.iter().zip(&r.weights) {
            out.push((c + 0.5 * h * t, 0.5 * h * w));
        }
    }
    Ok(out)
}

/// `F` and its `θ`-derivatives sampled on the `s` grid.
struct PacketImage {
    etas: Vec<f64>,
    /// `w_n g(η_n) ϑ_λ(η_n)`.
    amplitudes: Vec<f64>,
    s_weights: Vec<f64>,
    /// `e^{iη_n s_j}`, row-major in `j`.
    phases: Vec<Complex64>,
}

impl PacketImage {
    fn new(packet: &WavePacket, lambda: WeightParameter) -> Result<Self> {
        let (lo, hi) = packet.support();
        let eta_nodes = composite(lo, hi, ETA_PANELS, NODES_PER_PANEL)?;
        let mut etas = Vec::with_capacity(eta_nodes.len());
        let mut amplitudes = Vec::with_capacity(eta_nodes.len());
        for &(eta, w) in &eta_nodes {
            etas.push(eta);
            amplitudes.push(w * packet.eval(eta) * vartheta(lambda, eta)?);
        }
        let window = packet.s_window();
        let panel = 1f64.max(1.0 / packet.width);
        let panels = (2.0 * window / panel).ceil() as usize;
        let s_nodes = composite(-window, window, panels, NODES_PER_PANEL)?;
        let mut phases = Vec::with_capacity(s_nodes.len() * etas.len());
        for &(s, _) in &s_nodes {
            phases.extend(etas.iter().map(|&eta| Complex64::from_polar(1.0, eta * s)));
        }
        Ok(PacketImage {
            etas,
            amplitudes,
            s_weights: s_nodes.iter().map(|n| n.1).collect(),
            phases,
        })
    }

    /// `∂_θ^i F(s_j, θ)` for every `j`.
    fn image(&self, theta: f64, order: u32) -> Vec<Complex64> {
        let coef: Vec<f64> = self
            .etas
            .iter()
            .zip(&self.amplitudes)
            .map(|(&eta, &a)| a * (-eta).powi(order as i32) * (-eta * theta).exp())
            .collect();
        self.phases
            .chunks(self.etas.len())
            .map(|row| row.iter().zip(&coef).map(|(e, &c)| e * c).sum())
            .collect()
    }

    /// `∂_θ^m ∫ |F(s, θ)|² ds`.
    fn s_integral(&self, theta: f64, order: u32) -> f64 {
        let images: Vec<Vec<Complex64>> = (0..=order).map(|i| self.image(theta, i)).collect();
        let mut total = 0.0;
        for (j, &w) in self.s_weights.iter().enumerate() {
            let mut v = Complex64::new(0.0, 0.0);
            for i in 0..=order {
                v += images[i as usize][j]
                    * images[(order - i) as usize][j].conj()
                    * binomial(order, i);
            }
            total += w * v.re;
        }
        total
    }

    fn node_count(&self) -> (usize, usize) {
        (self.etas.len(), self.s_weights.len())
    }
}

/// `sin^λθ` with the parts carried by the rule's endpoint weights removed.
fn sine_part(lambda: f64, theta: f64, at_zero: bool, at_pi: bool) -> f64 {
    if lambda == 0.0 {
        return 1.0;
    }
    let d = PI - theta;
    let s = if theta <= FRAC_PI_2 {
        theta.sin()
    } else {
        d.sin()
    };
    let mut ln = lambda * s.ln();
    if at_zero {
        ln -= lambda * theta.ln();
    }
    if at_pi {
        ln -= lambda * d.ln();
    }
    ln.exp()
}

/// `⟨a f, f⟩` for the pullback `f` of `packet`, computed in `(s, θ)`.
pub fn hyperbolic_form_direct(
    symbol: &SymbolSpec,
    lambda: WeightParameter,
    packet: &WavePacket,
    tol: f64,
) -> Result<OracleValue> {
    if symbol.geometry() != Geometry::Hyperbolic {
        return Err(Error::GeometryMismatch {
            expected: Geometry::Hyperbolic,
            found: symbol.geometry(),
        });
    }
    let l = lambda.value();
    let image = PacketImage::new(packet, lambda)?;
    let norm = 2f64.powf(l) * (l + 1.0) / (2.0 * PI);
    let tracker = Tracker::new();
    let mut value = 0.0;
    if !symbol.terms().is_empty() {
        let mut cuts = vec![0.0];
        cuts.extend(symbol.breakpoints());
        cuts.push(PI);
        let share = tol / (cuts.len() - 1) as f64;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (at_zero, at_pi) = (a == 0.0, b == PI);
            let f = |t: f64| {
                let sym = tracker.record(symbol.eval_function_part(t).map(|v| (v, true)), f64::NAN);
                if sym == 0.0 {
                    return 0.0;
                }
                sym * sine_part(l, t, at_zero, at_pi) * image.s_integral(t, 0)
            };
            let panel = Panel::new(
                a,
                b,
                if at_zero { l } else { 0.0 },
                if at_pi { l } else { 0.0 },
            );
            let e = integrate_panel(f, panel, share / norm)?;
            if !e.converged {
                tracker.converged.set(false);
            }
            value += norm * e.value;
        }
    }
    for d in symbol.deltas() {
        let t = d.loc();
        let sine = |i: u32| sine_power_derivative(l, i, t);
        let inner = |i: u32| image.s_integral(t, i);
        let sign = if d.order() % 2 == 0 { 1.0 } else { -1.0 };
        value += sign * d.coef() * norm * leibniz(d.order(), &[&sine, &inner]);
    }
    let converged = tracker.finish()?;
    let (n_eta, n_s) = image.node_count();
    let mut settings = Settings::new();
    settings.insert("tol".into(), tol);
    settings.insert("s_window".into(), packet.s_window());
    settings.insert("s_nodes".into(), n_s as f64);
    settings.insert("eta_nodes".into(), n_eta as f64);
    settings.insert("packet_center".into(), packet.center);
    settings.insert("packet_width".into(), packet.width);
    Ok(OracleValue {
        value: Complex64::new(value, 0.0),
        converged,
        settings,
    })
}

/// `∫ f(η) |g(η)|² dη` over the packet support, adaptively.
pub fn packet_weighted_integral<F>(packet: &WavePacket, mut f: F, tol: f64) -> Result<OracleValue>
where
    F: FnMut(f64) -> Result<(f64, bool)>,
{
    let (lo, hi) = packet.support();
    let tracker = Tracker::new();
    let g = |eta: f64| {
        let v = tracker.record(f(eta), f64::NAN);
        let w = packet.eval(eta);
        v * w * w
    };
    let e = adaptive_integrate_with(g, lo, hi, AdaptiveOptions::absolute(tol))?;
    let converged = tracker.finish()? && e.converged;
    let mut settings = Settings::new();
    settings.insert("tol".into(), tol);
    settings.insert("eta_lo".into(), lo);
    settings.insert("eta_hi".into(), hi);
    Ok(OracleValue {
        value: Complex64::new(e.value, 0.0),
        converged,
        settings,
    })
}

/// `∫ γ(η) |g(η)|² dη`.
pub fn hyperbolic_form_spectral(
    phi: &SpectralFunction,
    packet: &WavePacket,
    tol: f64,
) -> Result<OracleValue> {
    if phi.geometry() != Geometry::Hyperbolic {
        return Err(Error::GeometryMismatch {
            expected: Geometry::Hyperbolic,
            found: phi.geometry(),
        });
    }
    packet_weighted_integral(
        packet,
        |eta| phi.evaluate(eta).map(|e| (e.value, e.converged)),
        tol,
    )
}

/// Direct against spectral side for one symbol and packet.
pub fn hyperbolic_comparison(
    symbol: &SymbolSpec,
    phi: &SpectralFunction,
    packet: &WavePacket,
    tol: f64,
) -> Result<FormComparison> {
    let direct = hyperbolic_form_direct(symbol, phi.lambda(), packet, tol)?;
    let spectral = hyperbolic_form_spectral(phi, packet, tol)?;
    let mut settings = direct.settings;
    settings.extend(
        spectral
            .settings
            .into_iter()
            .map(|(k, v)| (format!("spectral_{k}"), v)),
    );
    Ok(FormComparison::new(
        direct.value,
        spectral.value,
        direct.converged && spectral.converged,
        settings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{spectral_function, SpectralOptions};

    fn lam(l: f64) -> WeightParameter {
        WeightParameter::new(l).unwrap()
    }

    fn sym(text: &str) -> SymbolSpec {
        SymbolSpec::parse(Geometry::Hyperbolic, text).unwrap()
    }

    #[test]
    fn packet_is_normalized() {
        let p = WavePacket::new(0.3, 0.7).unwrap();
        let e = packet_weighted_integral(&p, |_| Ok((1.0, true)), 1e-13).unwrap();
        assert!((e.value.re - 1.0).abs() < 1e-12);
        assert!(WavePacket::new(0.0, 0.0).is_err());
    }

    #[test]
    fn unit_symbol_form_is_one() {
        for &l in &[0.0, 1.0, 2.5] {
            for (c, w) in [(0.0, 1.0), (2.0, 0.5), (-1.5, 0.3)] {
                let e = hyperbolic_form_direct(
                    &sym("constant:1"),
                    lam(l),
                    &WavePacket::new(c, w).unwrap(),
                    1e-10,
                )
                .unwrap();
                assert!(
                    (e.value.re - 1.0).abs() < 1e-6,
                    "λ={l} ({c},{w}): {}",
                    e.value
                );
            }
        }
    }

    #[test]
    fn half_indicator_closed_form() {
        // λ = 0: γ(η) = 1/(1 + e^{-πη})
        let p = WavePacket::new(1.0, 0.5).unwrap();
        let direct =
            hyperbolic_form_direct(&sym("indicator:0,1.5707963267948966"), lam(0.0), &p, 1e-10)
                .unwrap();
        let exact =
            packet_weighted_integral(&p, |eta| Ok((1.0 / (1.0 + (-PI * eta).exp()), true)), 1e-12)
                .unwrap();
        assert!((direct.value - exact.value).norm() < 1e-6 * exact.value.norm());
    }

    #[test]
    fn delta_derivative_against_spectral_side() {
        let s = sym("delta_derivative:order=1,loc=1.2");
        let p = WavePacket::new(0.5, 0.8).unwrap();
        let phi = spectral_function(&s, lam(1.0), &[], SpectralOptions::default()).unwrap();
        let c = hyperbolic_comparison(&s, &phi, &p, 1e-10).unwrap();
        assert!(c.within(1e-6), "{c:?}");
    }

    #[test]
    fn narrow_packet_localizes() {
        let s = sym("sum(indicator:0.4,2; 0.5*power:exp=1)");
        let p = WavePacket::new(2.0, 0.05).unwrap();
        let direct = hyperbolic_form_direct(&s, lam(0.0), &p, 1e-9).unwrap();
        let phi = spectral_function(&s, lam(0.0), &[2.0], SpectralOptions::default()).unwrap();
        assert!((direct.value.re - phi.samples()[0].value.re).abs() < 1e-2);
    }

    #[test]
    fn geometry_is_checked() {
        let p = WavePacket::new(0.0, 1.0).unwrap();
        let s = SymbolSpec::constant(Geometry::Parabolic, 1.0).unwrap();
        assert!(matches!(
            hyperbolic_form_direct(&s, lam(0.0), &p, 1e-8),
            Err(Error::GeometryMismatch { .. })
        ));
    }
}
