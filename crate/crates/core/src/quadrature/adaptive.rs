use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::{Estimate, QuadValue};
use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss 7-point weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const DEFAULT_MAX_PANELS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl AdaptiveOptions {
    pub fn absolute(tol: f64) -> Self {
        AdaptiveOptions {
            abs_tol: tol,
            rel_tol: 0.0,
            max_panels: DEFAULT_MAX_PANELS,
        }
    }

    pub fn relative(tol: f64) -> Self {
        AdaptiveOptions {
            abs_tol: 0.0,
            rel_tol: tol,
            max_panels: DEFAULT_MAX_PANELS,
        }
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> Segment<T> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    let value = kronrod * h;
    let error = ((kronrod - gauss) * h).magnitude();
    Segment { a, b, value, error }
}

/// Global adaptive Gauss–Kronrod (7/15) with bisection of the worst panel.
/// Endpoints are never sampled, so integrable endpoint singularities are
/// tolerated. Stops at `abs_tol` (or `rel_tol·|value|`) or after
/// `max_panels` panels with `converged = false`.
pub fn adaptive_integrate_with<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    opts: AdaptiveOptions,
) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::domain(format!(
            "adaptive_integrate requires finite a < b, got [{a}, {b}]"
        )));
    }
    if !(opts.abs_tol > 0.0 || opts.rel_tol > 0.0) {
        return Err(Error::param(
            "adaptive_integrate requires a positive tolerance",
        ));
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(&mut f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    let target = |v: T| opts.abs_tol.max(opts.rel_tol * v.magnitude());
    while error > target(value) && heap.len() < opts.max_panels {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let left = gk15(&mut f, worst.a, mid);
        let right = gk15(&mut f, mid, worst.b);
        value = value - worst.value + left.value + right.value;
        error = error - worst.error + left.error + right.error;
        heap.push(left);
        heap.push(right);
    }
    // resum to shed the running-update drift
    let mut total = T::zero();
    let mut err = 0.0;
    for s in heap.iter() {
        total += s.value;
        err += s.error;
    }
    if !(err.is_finite() && total.magnitude().is_finite()) {
        return Err(Error::Quadrature(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok(Estimate {
        value: total,
        error: err,
        converged: err <= target(total),
    })
}

/// [`adaptive_integrate_with`] with an absolute tolerance and the default
/// panel budget.
pub fn adaptive_integrate<T, F>(f: F, a: f64, b: f64, tol: f64) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    adaptive_integrate_with(f, a, b, AdaptiveOptions::absolute(tol))
}

/// Integral over the logarithmic variable `s = ln r`.
pub fn log_axis_integrate<F>(f: F, s_min: f64, s_max: f64, tol: f64) -> Result<Estimate<Complex64>>
where
    F: FnMut(f64) -> Complex64,
{
    adaptive_integrate(f, s_min, s_max, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn constant() {
        let e = adaptive_integrate(|_| 1.0, 0.0, 1.0, 1e-12).unwrap();
        assert!((e.value - 1.0).abs() < 1e-15);
        assert!(e.converged);
    }

    #[test]
    fn oscillating_sine() {
        let e = adaptive_integrate(|r: f64| (50.0 * r).sin(), 0.0, 1.0, 1e-12).unwrap();
        assert!((e.value - (1.0 - 50f64.cos()) / 50.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_against_jacobi_rule() {
        // only the left end: sin(fl(π)) ≠ 0, so the right singularity sits just
        // outside [0, fl(π)]
        let half = adaptive_integrate(|t: f64| t.sin().powf(-0.5), 0.0, PI / 2.0, 1e-11).unwrap();
        let jacobi = crate::quadrature::integrate_panel(
            |t: f64| (t.sin() / (t * (PI - t))).powf(-0.5),
            crate::quadrature::Panel::new(0.0, PI, -0.5, -0.5),
            1e-14,
        )
        .unwrap();
        assert_relative_eq!(2.0 * half.value, jacobi.value, max_relative = 1e-9);
    }

    #[test]
    fn log_axis_unit_and_gaussian() {
        let e = log_axis_integrate(|_| Complex64::new(1.0, 0.0), 0.0, 1.0, 1e-12).unwrap();
        assert!((e.value.re - 1.0).abs() < 1e-15);
        let e =
            log_axis_integrate(|s| Complex64::new((-s * s).exp(), 0.0), -8.0, 8.0, 1e-13).unwrap();
        assert!((e.value.re - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn flags_budget_exhaustion() {
        let e = adaptive_integrate_with(
            |x: f64| 1.0 / x.sqrt().sqrt().powi(5),
            0.0,
            1.0,
            AdaptiveOptions::absolute(1e-14).with_max_panels(50),
        )
        .unwrap();
        assert!(!e.converged);
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(adaptive_integrate(|_| 1.0, 1.0, 0.0, 1e-8).is_err());
        assert!(adaptive_integrate(|_| 1.0, 0.0, 1.0, 0.0).is_err());
    }
}
