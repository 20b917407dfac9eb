//! The acceptance battery: one pass/fail outcome per criterion, each at a
//! fixed tolerance. Shared by `selftest` and the `acceptance` test target.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use num_complex::Complex64;

use crate::classify::{
    builtin_calibration, oscillation_modulus, ClassifyOptions, OscillationMetric, Verdict,
};
use crate::cli::{self, RunConfig};
use crate::error::Result;
use crate::oracle::parabolic::{FORM_TOL, GAMMA_PREFACTOR};
use crate::oracle::{
    hyperbolic_comparison, hyperbolic_form_direct, normalization_probe, parabolic_form_direct,
    parabolic_form_spectral, resolution_apply_check, toeplitz_matrix_disk,
    unitarity_check_parabolic, CoherentState, DiskSymbol, WavePacket,
};
use crate::quadrature::{adaptive_integrate_with, integrate_panel, AdaptiveOptions, Panel};
use crate::specfun::{ln_vartheta_sq, WeightParameter};
use crate::spectra::{default_grid, spectral_function, GridFunction, SpectralOptions};
use crate::symbols::{Geometry, SymbolSpec};

pub const LAMBDAS: [f64; 4] = [-0.5, 0.0, 1.0, 2.5];

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} {} ({:.1}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub type Criterion = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(&str, Criterion); 11] = [
    ("unit-symbol", unit_symbol),
    ("elliptic-closed-form", elliptic_closed_form),
    ("vartheta-identity", vartheta_identity),
    ("diagonalization-oracle", diagonalization_oracle),
    ("parabolic-form-equality", parabolic_form_equality),
    ("normalization-probe", normalization_probe_criterion),
    ("hyperbolic-form-equality", hyperbolic_form_equality),
    ("kernel-check", kernel_check),
    ("compactness", compactness),
    ("classification-calibration", classification_calibration),
    ("determinism", determinism),
];

pub fn run_one(name: &'static str, criterion: Criterion) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = match criterion() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Outcome {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all() -> Vec<Outcome> {
    CRITERIA.iter().map(|&(name, c)| run_one(name, c)).collect()
}

fn lam(l: f64) -> Result<WeightParameter> {
    WeightParameter::new(l)
}

fn sym(geometry: Geometry, text: &str) -> Result<SymbolSpec> {
    SymbolSpec::parse(geometry, text)
}

/// `γ ≡ 1` for `a ≡ 1`, every geometry and weight, default grids, absolute 1e-10.
fn unit_symbol() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for g in Geometry::ALL {
        let one = SymbolSpec::constant(g, 1.0)?;
        for l in LAMBDAS {
            let phi =
                spectral_function(&one, lam(l)?, &default_grid(g), SpectralOptions::default())?;
            all_converged &= phi.all_converged();
            for s in phi.samples() {
                worst = worst.max((s.value - 1.0).norm());
            }
        }
    }
    Ok((
        worst <= 1e-10 && all_converged,
        format!("max |γ - 1| = {worst:.2e} (tol 1e-10)"),
    ))
}

/// `a(ρ) = ρ²` gives `(k+1)/(k+λ+2)` for `k ≤ 200`, relative 1e-9.
fn elliptic_closed_form() -> Result<(bool, String)> {
    let a = sym(Geometry::Elliptic, "power:exp=2")?;
    let grid: Vec<f64> = (0..=200).map(f64::from).collect();
    let mut worst: f64 = 0.0;
    for l in LAMBDAS {
        let phi = spectral_function(&a, lam(l)?, &grid, SpectralOptions::default())?;
        for s in phi.samples() {
            let exact = (s.point + 1.0) / (s.point + l + 2.0);
            worst = worst.max((s.value.re - exact).abs() / exact);
        }
    }
    Ok((
        worst <= 1e-9,
        format!("max rel err = {worst:.2e} (tol 1e-9)"),
    ))
}

/// `∫_0^π e^{-2ηθ} sin^λθ dθ` by quadrature: endpoint panels carry the
/// `θ^λ` and `(π-θ)^λ` weights, the middle is smooth.
fn sine_exponential_integral(l: f64, eta: f64) -> Result<f64> {
    let edge = 0.5 / (1.0 + 2.0 * eta.abs());
    let g = |t: f64| (-2.0 * eta * t).exp();
    let tol = 1e-14 * g(0.0).max(g(PI));
    let left = integrate_panel(
        |t: f64| {
            if t == 0.0 {
                g(t)
            } else {
                g(t) * (t.sin() / t).powf(l)
            }
        },
        Panel::new(0.0, edge, l, 0.0),
        tol,
    )?;
    let right = integrate_panel(
        |t: f64| {
            let d = PI - t;
            if d == 0.0 {
                g(t)
            } else {
                g(t) * (d.sin() / d).powf(l)
            }
        },
        Panel::new(PI - edge, PI, 0.0, l),
        tol,
    )?;
    let middle = adaptive_integrate_with(
        |t: f64| g(t) * t.sin().powf(l),
        edge,
        PI - edge,
        AdaptiveOptions::absolute(tol),
    )?;
    Ok(left.value + middle.value + right.value)
}

/// Integral and Γ-forms of `ϑ_λ²` agree to 1e-8 relative on `|η| ≤ 20`;
/// `ϑ_0² e^{-πη + (π-0.1)|η|}` does not grow on `|η| ≤ 50`.
fn vartheta_identity() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for l in LAMBDAS {
        for i in 0..=160 {
            let eta = -20.0 + 0.25 * i as f64;
            let integral = sine_exponential_integral(l, eta)?;
            let ln_integral_form = -(2f64.powf(l) * (l + 1.0) * integral).ln();
            let ln_gamma_form = ln_vartheta_sq(lam(l)?, eta)?;
            worst = worst.max((ln_integral_form - ln_gamma_form).exp_m1().abs());
        }
    }
    let eps = 0.1;
    let bounded = |eta: f64| -> Result<f64> {
        Ok((ln_vartheta_sq(lam(0.0)?, eta)? - PI * eta + (PI - eps) * eta.abs()).exp())
    };
    let mut inner: f64 = 0.0;
    let mut outer: f64 = 0.0;
    for i in 0..=1000 {
        let eta = -50.0 + 0.1 * i as f64;
        let v = bounded(eta)?;
        if eta.abs() <= 25.0 {
            inner = inner.max(v);
        } else {
            outer = outer.max(v);
        }
    }
    let ok = worst <= 1e-8 && outer.is_finite() && outer <= inner;
    Ok((ok, format!("max rel err = {worst:.2e} (tol 1e-8); bound sup |η|≤25: {inner:.3}, 25<|η|≤50: {outer:.3}")))
}

/// Radial battery at `N = 24`: off-diagonal below 1e-8, diagonal within 1e-6
/// of `γ`; a non-radial symbol leaves off-diagonal mass.
fn diagonalization_oracle() -> Result<(bool, String)> {
    let size = 24;
    let battery = [
        "constant:1",
        "indicator:0,0.5",
        "power:exp=2",
        "delta:loc=0.5",
    ];
    let ks: Vec<f64> = (0..size).map(|k| k as f64).collect();
    let (mut off, mut diag): (f64, f64) = (0.0, 0.0);
    for l in [0.0, 1.0, 2.5] {
        for text in battery {
            let a = sym(Geometry::Elliptic, text)?;
            let m = toeplitz_matrix_disk(&DiskSymbol::Radial(a.clone()), lam(l)?, size)?;
            let phi = spectral_function(&a, lam(l)?, &ks, SpectralOptions::default())?;
            off = off.max(m.off_diagonal_max());
            for (d, s) in m.diagonal().iter().zip(phi.samples()) {
                diag = diag.max((d - s.value).norm() / s.value.norm());
            }
        }
    }
    let detector =
        toeplitz_matrix_disk(&DiskSymbol::real_part(), lam(0.0)?, size)?.off_diagonal_max();
    let ok = off < 1e-8 && diag <= 1e-6 && detector > 1e-2;
    Ok((ok, format!("off-diagonal {off:.2e} (tol 1e-8), diagonal rel {diag:.2e} (tol 1e-6), Re z off-diagonal {detector:.3}")))
}

/// Battery `{1, χ_(0,1), δ(y-1)}` over coherent pairs and weights within
/// 1e-5; `a ≡ 1` within the reported quadrature budget of the closed form;
/// `δ(y-1)` at `λ = 0, μ = ν = 1` equal to `1/16` within 1e-6.
fn parabolic_form_equality() -> Result<(bool, String)> {
    let battery = ["constant:1", "indicator:0,1", "delta:loc=1"];
    let mut worst: f64 = 0.0;
    let mut unit_ok = true;
    for l in [0.0, 1.0] {
        for (mu, nu) in [(1.0, 1.0), (1.0, 2.0), (2.0, 2.0)] {
            for text in battery {
                let a = sym(Geometry::Parabolic, text)?;
                let direct = parabolic_form_direct(&a, lam(l)?, mu, nu, FORM_TOL)?;
                let phi = spectral_function(&a, lam(l)?, &[], SpectralOptions::default())?;
                let spectral = parabolic_form_spectral(&phi, mu, nu, FORM_TOL)?;
                worst = worst.max((direct.value - spectral.value).norm() / spectral.value.norm());
            }
            let u = unitarity_check_parabolic(lam(l)?, mu, nu)?;
            let budget = u.settings["tail_bound"] + FORM_TOL * u.spectral.norm();
            unit_ok &= u.abs_err <= budget && u.converged;
        }
    }
    let delta = parabolic_form_direct(
        &sym(Geometry::Parabolic, "delta:loc=1")?,
        lam(0.0)?,
        1.0,
        1.0,
        FORM_TOL,
    )?;
    let delta_err = (delta.value - 0.0625).norm();
    let ok = worst <= 1e-5 && unit_ok && delta_err <= 1e-6;
    Ok((
        ok,
        format!(
            "max rel err {worst:.2e} (tol 1e-5), unit symbol within quadrature budget: {unit_ok}, δ(y-1) err {delta_err:.2e} (tol 1e-6)"
        ),
    ))
}

/// For `λ ∈ {1, 2.5}` only the `1/Γ(λ+1)` prefactor reproduces the direct form.
fn normalization_probe_criterion() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for l in [1.0, 2.5] {
        let r = normalization_probe(lam(l)?)?;
        ok &= r.only(GAMMA_PREFACTOR);
        parts.push(format!("λ={l}: matching {:?}", r.matching));
    }
    Ok((ok, parts.join("; ")))
}

/// Battery `{1, χ_(0,π/2), δ(θ-π/2)}` with two packets and two weights within
/// 1e-4; a narrow packet reproduces the point value within 1e-2.
fn hyperbolic_form_equality() -> Result<(bool, String)> {
    let battery = [
        "constant:1",
        "indicator:0,1.5707963267948966",
        "delta:loc=1.5707963267948966",
    ];
    let mut worst: f64 = 0.0;
    for l in [0.0, 1.0] {
        for (center, width) in [(0.0, 1.0), (2.0, 0.5)] {
            let packet = WavePacket::new(center, width)?;
            for text in battery {
                let a = sym(Geometry::Hyperbolic, text)?;
                let phi = spectral_function(&a, lam(l)?, &[], SpectralOptions::default())?;
                worst = worst.max(hyperbolic_comparison(&a, &phi, &packet, 1e-9)?.rel_err);
            }
        }
    }
    let a = SymbolSpec::indicator(Geometry::Hyperbolic, 0.0, FRAC_PI_2)?;
    let narrow = WavePacket::new(2.0, 0.05)?;
    let local = hyperbolic_form_direct(&a, lam(0.0)?, &narrow, 1e-9)?
        .value
        .re;
    let point = spectral_function(&a, lam(0.0)?, &[2.0], SpectralOptions::default())?.samples()[0]
        .value
        .re;
    let local_err = (local - point).abs();
    let ok = worst <= 1e-4 && local_err <= 1e-2;
    Ok((
        ok,
        format!("max rel err {worst:.2e} (tol 1e-4), localization err {local_err:.2e} (tol 1e-2)"),
    ))
}

/// The resolution of identity applied to `f_1` matches its closed form within
/// 1e-5; small and large cuts approach 0 and `f_1`.
fn kernel_check() -> Result<(bool, String)> {
    let l = lam(0.0)?;
    let zs = [Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0)];
    let mut worst: f64 = 0.0;
    for eta in [0.5, 2.0, 10.0] {
        for &z in &zs {
            worst = worst.max(resolution_apply_check(l, eta, 1.0, z)?.rel_err);
        }
    }
    let state = CoherentState::new(1.0)?;
    let (mut small, mut large): (f64, f64) = (0.0, 0.0);
    for &z in &zs {
        let f = state.eval(l, z);
        small = small.max(resolution_apply_check(l, 1e-3, 1.0, z)?.direct.norm() / f.norm());
        large = large.max((resolution_apply_check(l, 50.0, 1.0, z)?.direct - f).norm() / f.norm());
    }
    let ok = worst <= 1e-5 && small <= 1e-4 && large <= 1e-5;
    Ok((
        ok,
        format!("max rel err {worst:.2e} (tol 1e-5), |E(1e-3)f|/|f| = {small:.2e}, |E(50)f - f|/|f| = {large:.2e}"),
    ))
}

/// Oscillating radial symbol decays in `k`; oscillating angular symbol has
/// settled by `η = 5·10³`.
fn compactness() -> Result<(bool, String)> {
    let a = sym(Geometry::Elliptic, "osc_radial:beta=0.25,alpha=0.5")?;
    let grid: Vec<f64> = (0..=200).map(f64::from).collect();
    let phi = spectral_function(&a, lam(0.0)?, &grid, SpectralOptions::default())?;
    let abs: Vec<f64> = phi.samples().iter().map(|s| s.value.norm()).collect();
    let head = abs[..=10].iter().copied().fold(0.0, f64::max);
    let tail = abs[150..=200].iter().copied().fold(0.0, f64::max);
    let b = sym(Geometry::Hyperbolic, "osc_angular:beta=0.5,alpha=1")?;
    let psi = spectral_function(&b, lam(0.0)?, &[5e3, 1e4], SpectralOptions::default())?;
    let jump = (psi.samples()[1].value - psi.samples()[0].value).norm();
    let ok = tail < 0.2 * head && jump <= 1e-2 && psi.all_converged();
    Ok((
        ok,
        format!(
            "tail/head = {:.3} (need < 0.2), |γ(1e4) - γ(5e3)| = {jump:.2e} (tol 1e-2)",
            tail / head
        ),
    ))
}

/// Default thresholds reproduce the four reference classifications.
fn classification_calibration() -> Result<(bool, String)> {
    let opts = ClassifyOptions::default();
    let mut verdicts = Vec::new();
    for name in ["reflection", "hmv"] {
        let (f, metric) = builtin_calibration(name)?;
        verdicts.push((
            name,
            oscillation_modulus(&f, metric, &opts)?.verdict,
            Verdict::Violates,
        ));
    }
    let etas: Vec<f64> = (0..=1200)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 1200.0))
        .collect();
    let par = spectral_function(
        &sym(Geometry::Parabolic, "delta:loc=1")?,
        lam(0.0)?,
        &etas,
        SpectralOptions::default(),
    )?;
    let r = oscillation_modulus(&GridFunction::from(&par), OscillationMetric::Log, &opts)?;
    verdicts.push(("parabolic δ(y-1)", r.verdict, Verdict::Consistent));
    let (reference, _) = builtin_calibration("hyp_delta")?;
    let hyp = spectral_function(
        &sym(Geometry::Hyperbolic, "delta:loc=1.5707963267948966")?,
        lam(0.0)?,
        &reference.points,
        SpectralOptions::default(),
    )?;
    let r = oscillation_modulus(&GridFunction::from(&hyp), OscillationMetric::Arcsinh, &opts)?;
    verdicts.push(("hyperbolic δ(θ-π/2)", r.verdict, Verdict::Consistent));
    let ok = verdicts.iter().all(|(_, got, want)| got == want);
    let detail = verdicts
        .iter()
        .map(|(n, got, _)| format!("{n}: {}", got.name()))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((ok, detail))
}

/// Two `gamma` runs with the same config write byte-identical files.
fn determinism() -> Result<(bool, String)> {
    let dir = std::env::temp_dir().join(format!(
        "toeplitz-spectra-determinism-{}",
        std::process::id()
    ));
    std::fs::create_dir_all(&dir)?;
    let cases = [
        ("hyperbolic", "indicator:0,1.5707963268", "-10:10:401"),
        (
            "parabolic",
            "sum(delta:loc=1; indicator:0.5,2)",
            "geom:1e-2:1e2:101",
        ),
        ("elliptic", "power:exp=2", "0:200"),
    ];
    let mut same = true;
    for (i, (geometry, symbol, grid)) in cases.iter().enumerate() {
        let mut bytes = Vec::new();
        for run in 0..2 {
            let path = dir.join(format!("case{i}-run{run}.csv"));
            let config = RunConfig {
                geometry: Some(geometry.to_string()),
                lambda: Some(1.0),
                symbol: Some(symbol.to_string()),
                grid: Some(grid.to_string()),
                out: Some(path.clone()),
                ..Default::default()
            };
            cli::cmd_gamma(&config)?;
            bytes.push(std::fs::read(&path)?);
        }
        same &= bytes[0] == bytes[1];
    }
    std::fs::remove_dir_all(&dir)?;
    Ok((
        same,
        format!("{} configurations, identical output: {same}", cases.len()),
    ))
}
