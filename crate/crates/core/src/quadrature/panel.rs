use super::cache::rule;
use super::rules::Family;
use super::{Estimate, QuadValue};
use crate::error::{Error, Result};

const FIRST_ORDER: usize = 8;
const LAST_ORDER: usize = 512;

/// An interval `[a, b]` carrying the algebraic weight `(x-a)^left (b-x)^right`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub left: f64,
    pub right: f64,
}

impl Panel {
    pub fn smooth(a: f64, b: f64) -> Self {
        Panel {
            a,
            b,
            left: 0.0,
            right: 0.0,
        }
    }

    pub fn new(a: f64, b: f64, left: f64, right: f64) -> Self {
        Panel { a, b, left, right }
    }

    fn family(&self) -> Family {
        if self.left == 0.0 && self.right == 0.0 {
            Family::Legendre
        } else {
            Family::Jacobi {
                alpha: self.right,
                beta: self.left,
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.a < self.b) {
            return Err(Error::domain(format!(
                "panel [{}, {}] is not a finite interval",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

/// `Σ_i w_i f(x_i)` with a fixed-order rule on `panel`; the weight
/// `(x-a)^left (b-x)^right` is built into the rule.
pub fn fixed_panel<T, F>(f: &mut F, panel: Panel, n: usize) -> Result<T>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    panel.validate()?;
    let r = rule(panel.family(), n)?;
    let half = 0.5 * (panel.b - panel.a);
    let scale = half.powf(panel.left + panel.right + 1.0);
    let mut acc = T::zero();
    for (&t, &w) in r.nodes.iter().zip(&r.weights) {
        // near-endpoint nodes are formed from the closer end
        let x = if t < 0.0 {
            panel.a + half * (1.0 + t)
        } else {
            panel.b - half * (1.0 - t)
        };
        acc += f(x) * w;
    }
    Ok(acc * scale)
}

/// `∫_a^b f(x) (x-a)^left (b-x)^right dx`, doubling the order from 8 until
/// two successive orders agree to `tol` (absolute) or order 512 is reached.
pub fn integrate_panel<T, F>(mut f: F, panel: Panel, tol: f64) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let mut n = FIRST_ORDER;
    let mut prev = fixed_panel(&mut f, panel, n)?;
    loop {
        n *= 2;
        let next = fixed_panel(&mut f, panel, n)?;
        let error = (next - prev).magnitude();
        if !error.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite integrand on [{}, {}]",
                panel.a, panel.b
            )));
        }
        if error <= tol || n >= LAST_ORDER {
            return Ok(Estimate {
                value: next,
                error,
                converged: error <= tol,
            });
        }
        prev = next;
    }
}

/// Sum of [`integrate_panel`] over `panels`, splitting `tol` evenly.
pub fn integrate_panels<T, F>(mut f: F, panels: &[Panel], tol: f64) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let share = tol / panels.len().max(1) as f64;
    let mut total = Estimate::zero();
    for &p in panels {
        total = total.combine(integrate_panel(&mut f, p, share)?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn smooth_panel() {
        let e = integrate_panel(|x: f64| x.sin(), Panel::smooth(0.0, PI), 1e-14).unwrap();
        assert!(e.converged);
        assert!((e.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn endpoint_weights_are_exact() {
        // ∫_2^5 (x-2)^{-0.5} (5-x)^{1.5} dx = 3^{2} B(0.5, 2.5)
        let e = integrate_panel(|_| 1.0, Panel::new(2.0, 5.0, -0.5, 1.5), 1e-14).unwrap();
        let exact = 9.0 * specfun::ln_beta(0.5, 2.5).unwrap().exp();
        assert_relative_eq!(e.value, exact, max_relative = 1e-14);
    }

    #[test]
    fn singular_sine_cross_rule() {
        // ∫_0^π sin^{-1/2}θ dθ = 2 ∫_0^{π/2} sin^{-1/2}θ dθ = B(1/4, 1/2)
        let exact = specfun::ln_beta(0.25, 0.5).unwrap().exp();
        let smooth = |t: f64| {
            if t == 0.0 {
                1.0
            } else {
                (t.sin() / t).powf(-0.5)
            }
        };
        let half = integrate_panel(smooth, Panel::new(0.0, PI / 2.0, -0.5, 0.0), 1e-14).unwrap();
        assert_relative_eq!(2.0 * half.value, exact, max_relative = 1e-13);
        let full = integrate_panel(
            |t: f64| (t.sin() / (t * (PI - t))).powf(-0.5),
            Panel::new(0.0, PI, -0.5, -0.5),
            1e-14,
        )
        .unwrap();
        assert_relative_eq!(full.value, exact, max_relative = 1e-13);
    }

    #[test]
    fn complex_values() {
        let e = integrate_panel(
            |x: f64| Complex64::new(0.0, x).exp(),
            Panel::smooth(0.0, 1.0),
            1e-14,
        )
        .unwrap();
        let exact = (Complex64::new(0.0, 1.0).exp() - 1.0) / Complex64::new(0.0, 1.0);
        assert!((e.value - exact).norm() < 1e-14);
    }

    #[test]
    fn reports_non_convergence() {
        let e = integrate_panel(|x: f64| (1e4 * x).sin(), Panel::smooth(0.0, 10.0), 1e-12).unwrap();
        assert!(!e.converged);
    }

    #[test]
    fn rejects_degenerate_panel() {
        assert!(integrate_panel(|_| 1.0, Panel::smooth(1.0, 1.0), 1e-10).is_err());
    }
}
