use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_relative_eq;
use proptest::prelude::*;

use super::*;
use crate::specfun::{self, regularized_lower_gamma};

fn lam(l: f64) -> WeightParameter {
    WeightParameter::new(l).unwrap()
}

fn opts() -> SpectralOptions {
    SpectralOptions::default()
}

fn real_values(phi: &SpectralFunction) -> Vec<f64> {
    phi.samples().iter().map(|s| s.value.re).collect()
}

fn at(symbol: &SymbolSpec, l: f64, t: f64) -> f64 {
    let e = point_value(symbol, lam(l), t, DEFAULT_TOL).unwrap();
    assert!(e.converged, "{} at {t} did not converge", symbol.label());
    e.value
}

#[test]
fn constant_symbol_has_unit_spectrum() {
    for g in Geometry::ALL {
        let one = SymbolSpec::constant(g, 1.0).unwrap();
        for &l in &[-0.5, 0.0, 1.0, 2.5] {
            let phi = spectral_function(&one, lam(l), &default_grid(g), opts()).unwrap();
            assert!(phi.all_converged());
            for s in phi.samples() {
                assert!(
                    (s.value.re - 1.0).abs() <= 1e-10,
                    "{g} λ={l} at {}: {}",
                    s.point,
                    s.value.re
                );
                assert_eq!(s.value.im, 0.0);
            }
        }
    }
}

#[test]
fn elliptic_rho_squared() {
    let s = SymbolSpec::parse(Geometry::Elliptic, "power:exp=2").unwrap();
    assert_relative_eq!(at(&s, 0.0, 3.0), 0.8, max_relative = 1e-12);
    for &l in &[-0.5, 0.0, 2.5] {
        let ks: Vec<u64> = (0..=200).collect();
        let phi = gamma_elliptic(&s, lam(l), &ks, opts()).unwrap();
        for (k, v) in ks.iter().zip(real_values(&phi)) {
            let exact = (*k as f64 + 1.0) / (*k as f64 + l + 2.0);
            assert_relative_eq!(v, exact, max_relative = 1e-9);
        }
    }
}

#[test]
fn elliptic_delta_at_half() {
    let s = SymbolSpec::delta(Geometry::Elliptic, 0.5).unwrap();
    assert_relative_eq!(at(&s, 0.0, 0.0), 1.0, max_relative = 1e-14);
    // k = 2, λ = 1: Γ(5)/(Γ(3)Γ(2)) · 2 (1/2)^5 (3/4) = 12 · 3/64
    assert_relative_eq!(at(&s, 1.0, 2.0), 12.0 * 3.0 / 64.0, max_relative = 1e-13);
}

#[test]
fn elliptic_indicator_is_regularized_beta() {
    // χ_{(0,c)}(ρ): γ(k) = I_{c²}(k+1, λ+1); for λ = 0 this is c^{2(k+1)}
    let s = SymbolSpec::indicator(Geometry::Elliptic, 0.0, 0.7).unwrap();
    for k in 0..40u64 {
        assert_relative_eq!(
            at(&s, 0.0, k as f64),
            0.49f64.powi(k as i32 + 1),
            max_relative = 1e-9,
            epsilon = 1e-12
        );
    }
}

#[test]
fn elliptic_outer_indicator_is_nondecreasing() {
    let s = SymbolSpec::indicator(Geometry::Elliptic, 0.6, 1.0).unwrap();
    let ks: Vec<u64> = (0..=300).collect();
    for &l in &[0.0, 2.5] {
        let v = real_values(&gamma_elliptic(&s, lam(l), &ks, opts()).unwrap());
        for w in v.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        assert!(v[300] > 0.99);
    }
}

#[test]
fn parabolic_delta_closed_form() {
    let s = SymbolSpec::delta(Geometry::Parabolic, 1.0).unwrap();
    assert_relative_eq!(at(&s, 0.0, 0.5), (-1f64).exp(), max_relative = 1e-14);
    for &eta in &[0.01, 0.3, 2.0, 40.0] {
        assert_relative_eq!(
            at(&s, 0.0, eta),
            2.0 * eta * (-2.0 * eta).exp(),
            max_relative = 1e-13
        );
    }
    // general location and weight: (2η)^{λ+1} y0^λ e^{-2ηy0} / Γ(λ+1)
    let s = SymbolSpec::delta(Geometry::Parabolic, 2.5).unwrap();
    let (l, eta): (f64, f64) = (1.5, 0.8);
    let exact = (2.0 * eta).powf(l + 1.0) * 2.5f64.powf(l) * (-5.0 * eta).exp()
        / specfun::gamma(l + 1.0).unwrap();
    assert_relative_eq!(at(&s, l, eta), exact, max_relative = 1e-13);
}

#[test]
fn parabolic_indicator_is_incomplete_gamma() {
    for &(l, c) in &[(0.0, 1.0), (1.0, 0.3), (2.5, 4.0), (-0.5, 1.0)] {
        let s = SymbolSpec::indicator(Geometry::Parabolic, 0.0, c).unwrap();
        for &eta in &[1e-3, 0.05, 0.5, 3.0, 60.0, 900.0] {
            let exact = regularized_lower_gamma(l + 1.0, 2.0 * eta * c).unwrap();
            assert!((at(&s, l, eta) - exact).abs() < 1e-9, "λ={l} c={c} η={eta}");
        }
    }
    let s = SymbolSpec::parse(Geometry::Parabolic, "indicator:1,inf").unwrap();
    let eta: f64 = 0.7;
    assert!((at(&s, 0.0, eta) - (-2.0 * eta).exp()).abs() < 1e-9);
}

#[test]
fn parabolic_power_closed_form() {
    // y^p: Γ(λ+p+1)/(Γ(λ+1)(2η)^p)
    let s = SymbolSpec::parse(Geometry::Parabolic, "power:exp=0.5").unwrap();
    let (l, eta) = (1.0, 2.0);
    let exact = specfun::gamma(2.5).unwrap() / 2.0;
    assert_relative_eq!(at(&s, l, eta), exact, max_relative = 1e-10);
}

#[test]
fn hyperbolic_half_indicator() {
    let s = SymbolSpec::indicator(Geometry::Hyperbolic, 0.0, FRAC_PI_2).unwrap();
    assert!((at(&s, 0.0, 0.0) - 0.5).abs() < 1e-12);
    for &eta in &[-20.0, -3.0, -0.4, 0.7, 5.0, 50.0, 200.0] {
        let exact = 1.0 / (1.0 + (-PI * eta).exp());
        assert!((at(&s, 0.0, eta) - exact).abs() < 1e-9, "η={eta}");
    }
}

#[test]
fn hyperbolic_delta_half_pi() {
    let s = SymbolSpec::delta(Geometry::Hyperbolic, FRAC_PI_2).unwrap();
    for &l in &[0.0, 1.0, 2.5] {
        for &eta in &[-30.0, -1.0, 0.0, 0.5, 4.0, 100.0] {
            let forms = half_pi_delta_forms(lam(l), eta).unwrap();
            assert_relative_eq!(at(&s, l, eta), forms.via_vartheta, max_relative = 1e-12);
        }
    }
    // λ = 0: |Γ(1+iη)|²/π = η / sinh(πη)
    let eta: f64 = 1.3;
    assert_relative_eq!(
        at(&s, 0.0, eta),
        eta / (PI * eta).sinh(),
        max_relative = 1e-12
    );
    assert!(at(&s, 0.0, 60.0) < 1e-70);
    assert!(at(&s, 0.0, -60.0) < 1e-70);
}

#[test]
fn hyperbolic_overflow_safety() {
    let s = SymbolSpec::parse(
        Geometry::Hyperbolic,
        "sum(indicator:0.3,2; power:exp=1.5; delta:loc=1)",
    )
    .unwrap();
    for &l in &[0.0, 4.0, 10.0] {
        let phi = gamma_hyperbolic(
            &s,
            lam(l),
            &[-200.0, -150.0, -1.0, 0.0, 1.0, 150.0, 200.0],
            opts(),
        )
        .unwrap();
        for s in phi.samples() {
            assert!(s.value.re.is_finite(), "λ={l} η={}", s.point);
        }
    }
}

#[test]
fn vartheta_integral_form() {
    // (2^λ (λ+1) ∫ e^{-2ηθ} sin^λθ dθ)^{-1/2} against the Γ form
    let (l, eta) = (1.5, 3.0);
    let e = crate::quadrature::integrate_panel(
        |t: f64| (-2.0 * eta * t).exp() * (t.sin() / (t * (PI - t))).powf(l),
        crate::quadrature::Panel::new(0.0, PI, l, l),
        1e-16,
    )
    .unwrap();
    let integral_form = (2f64.powf(l) * (l + 1.0) * e.value).powf(-0.5);
    assert_relative_eq!(
        specfun::vartheta(lam(l), eta).unwrap(),
        integral_form,
        max_relative = 1e-8
    );
}

#[test]
fn osc_radial_decays() {
    let s = SymbolSpec::parse(Geometry::Elliptic, "osc_radial:beta=0.25,alpha=0.5").unwrap();
    let head = at(&s, 0.0, 0.0);
    assert!((head - 0.8754).abs() < 1e-3, "{head}");
    let tail = at(&s, 0.0, 150.0);
    assert!((tail - 0.052).abs() < 2e-3, "{tail}");
    let end = at(&s, 0.0, 200.0);
    assert!((end - 0.0027).abs() < 1e-3, "{end}");
}

#[test]
fn osc_angular_values() {
    let s = SymbolSpec::parse(Geometry::Hyperbolic, "osc_angular:beta=0.5,alpha=1").unwrap();
    assert!((at(&s, 0.0, 0.5) - 0.43913).abs() < 1e-4);
    assert!((at(&s, 0.0, 2.0) - 0.06455).abs() < 1e-4);
    assert!((at(&s, 0.0, 10.0) - 5.87e-4).abs() < 1e-5);
    // η → -∞ concentrates at θ = π
    let limit = PI.powf(-0.5) * (1.0 / PI).sin();
    assert!((at(&s, 0.0, -200.0) - limit).abs() < 1e-2);
}

#[test]
fn geometry_mismatch_is_rejected() {
    let s = SymbolSpec::constant(Geometry::Parabolic, 1.0).unwrap();
    assert!(matches!(
        gamma_elliptic(&s, lam(0.0), &[0, 1], opts()),
        Err(Error::GeometryMismatch { .. })
    ));
    assert!(gamma_parabolic(&s, lam(0.0), &[0.0], opts()).is_err());
    let e = SymbolSpec::constant(Geometry::Elliptic, 1.0).unwrap();
    assert!(spectral_function(&e, lam(0.0), &[0.5], opts()).is_err());
}

#[test]
fn sweep_order_is_deterministic() {
    let s = SymbolSpec::parse(Geometry::Hyperbolic, "indicator:0.5,2").unwrap();
    let grid: Vec<f64> = (0..64).map(|i| -8.0 + 0.25 * i as f64).collect();
    let a = gamma_hyperbolic(&s, lam(1.0), &grid, opts()).unwrap();
    let b = gamma_hyperbolic(&s, lam(1.0), &grid, opts()).unwrap();
    assert_eq!(a.points(), grid);
    assert_eq!(a.values(), b.values());
    let again = a.evaluate(grid[5]).unwrap();
    assert_eq!(again.value, a.samples()[5].value.re);
}

/// `exp(-(x-x0)²/(2w²)) / (√(2π) w)` or its first derivative.
fn mollifier(geometry: Geometry, x0: f64, order: u32, w: f64) -> SymbolSpec {
    let cuts: Vec<f64> = (-10..=10).map(|j| x0 + j as f64 * w).collect();
    SymbolSpec::custom(geometry, "mollifier", cuts, move |x| {
        let z = (x - x0) / w;
        let g = (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * w);
        if order == 0 {
            g
        } else {
            -z / w * g
        }
    })
    .unwrap()
}

#[test]
fn delta_terms_match_mollified_delta() {
    let cases: [(Geometry, f64, &[f64]); 3] = [
        (Geometry::Elliptic, 0.5, &[0.0, 1.0, 3.0]),
        (Geometry::Parabolic, 1.0, &[0.2, 1.0, 2.5]),
        (Geometry::Hyperbolic, 1.2, &[-1.0, 0.0, 1.5]),
    ];
    for (g, x0, pts) in cases {
        for order in 0..=1u32 {
            let exact = SymbolSpec::new(
                g,
                vec![],
                vec![crate::symbols::DeltaTerm::new(g, order, x0, 1.0).unwrap()],
            )
            .unwrap();
            let wide = mollifier(g, x0, order, 2e-3);
            let narrow = mollifier(g, x0, order, 1e-3);
            for &l in &[0.0, 1.0] {
                for &t in pts {
                    let a = at(&exact, l, t);
                    // the smoothing error is O(w²); one Richardson step removes it
                    let b = (4.0 * at(&narrow, l, t) - at(&wide, l, t)) / 3.0;
                    assert!(
                        (a - b).abs() < 1e-6 * (1.0 + a.abs()),
                        "{g} m={order} λ={l} t={t}: {a} vs {b}"
                    );
                }
            }
        }
    }
}

fn bounded_symbol(g: Geometry) -> impl Strategy<Value = (SymbolSpec, f64, f64)> {
    let (lo, hi) = match g {
        Geometry::Parabolic => (0.0, 5.0),
        other => other.domain(),
    };
    (-2.0..2.0f64, -2.0..2.0f64, lo..hi, lo..hi).prop_filter_map("ordered", move |(c, d, a, b)| {
        if a >= b {
            return None;
        }
        let text = format!("sum(constant:{c}; {d}*indicator:{a},{b})");
        let s = SymbolSpec::parse(g, &text).ok()?;
        let values = [c, c + d];
        Some((s, values[0].min(values[1]), values[0].max(values[1])))
    })
}

fn geometry_point() -> impl Strategy<Value = (Geometry, f64)> {
    prop_oneof![
        (0u32..120).prop_map(|k| (Geometry::Elliptic, k as f64)),
        (-3.0..3.0f64).prop_map(|e| (Geometry::Parabolic, 10f64.powf(e))),
        (-40.0..40.0f64).prop_map(|e| (Geometry::Hyperbolic, e)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn averaging_keeps_values_in_range(
        ((s, inf, sup), l, t) in geometry_point().prop_flat_map(|(g, t)| (bounded_symbol(g), -0.5..3.0f64, Just(t)))
    ) {
        let v = point_value(&s, lam(l), t, DEFAULT_TOL).unwrap().value;
        prop_assert!(v >= inf - 1e-9 && v <= sup + 1e-9, "{} at {t}: {v} ∉ [{inf}, {sup}]", s.label());
    }

    #[test]
    fn linearity(
        ((a, _, _), (b, _, _), alpha, beta, l, t) in geometry_point().prop_flat_map(|(g, t)| {
            (bounded_symbol(g), bounded_symbol(g), -3.0..3.0f64, -3.0..3.0f64, 0.0..2.0f64, Just(t))
        })
    ) {
        let combo = a.scaled(alpha).unwrap().plus(&b.scaled(beta).unwrap()).unwrap();
        let lhs = point_value(&combo, lam(l), t, 1e-11).unwrap().value;
        let rhs = alpha * point_value(&a, lam(l), t, 1e-11).unwrap().value
            + beta * point_value(&b, lam(l), t, 1e-11).unwrap().value;
        prop_assert!((lhs - rhs).abs() <= 1e-10, "{lhs} vs {rhs}");
    }
}
