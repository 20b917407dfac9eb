use std::collections::VecDeque;
use std::f64::consts::PI;

use super::cache::rule;
use super::panel::{integrate_panel, Panel};
use super::rules::Family;
use super::Estimate;
use crate::error::{Error, Result};

/// Periods over which monotone decay must hold before extrapolating.
const WINDOW: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailOptions {
    pub tol: f64,
    pub max_periods: usize,
}

impl TailOptions {
    pub fn new(tol: f64) -> Self {
        TailOptions {
            tol,
            max_periods: 200_000,
        }
    }
}

fn legendre_on<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, n: usize) -> Result<f64> {
    let r = rule(Family::Legendre, n)?;
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    Ok(h * r
        .nodes
        .iter()
        .zip(&r.weights)
        .map(|(&t, &w)| w * f(c + h * t))
        .sum::<f64>())
}

/// `∫_{t0}^∞ amplitude(t) sin t dt` for an amplitude that is eventually
/// monotone and decaying.
///
/// The integral is cut at multiples of π. Each half-period is integrated with
/// 16- and 32-point Gauss–Legendre rules. Once 32 consecutive half-period
/// contributions alternate in sign with strictly decreasing magnitude, the
/// partial sums are extrapolated by repeated pairwise averaging (Euler), and
/// the result is accepted when two successive extrapolations agree to `tol`.
pub fn sine_tail<F>(mut amplitude: F, t0: f64, opts: TailOptions) -> Result<Estimate<f64>>
where
    F: FnMut(f64) -> f64,
{
    if !t0.is_finite() {
        return Err(Error::domain(format!("sine_tail start {t0} is not finite")));
    }
    let mut integrand = |t: f64| amplitude(t) * t.sin();
    let first_zero = (t0 / PI).floor() * PI + PI;
    let head = if first_zero - t0 > 1e-12 * first_zero.abs().max(1.0) {
        integrate_panel(
            &mut integrand,
            Panel::smooth(t0, first_zero),
            0.01 * opts.tol,
        )?
    } else {
        Estimate::exact(0.0)
    };
    let mut quad_error = head.error;
    let mut converged = head.converged;
    let mut partial = head.value;
    let mut terms: VecDeque<f64> = VecDeque::with_capacity(WINDOW + 1);
    let mut sums: VecDeque<f64> = VecDeque::with_capacity(WINDOW + 1);
    let mut previous: Option<f64> = None;
    let mut buf = [0.0; WINDOW];
    for j in 0..opts.max_periods {
        let a = first_zero + j as f64 * PI;
        let b = a + PI;
        let coarse = legendre_on(&mut integrand, a, b, 16)?;
        let fine = legendre_on(&mut integrand, a, b, 32)?;
        if !fine.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite amplitude near t = {a}"
            )));
        }
        let period_error = (fine - coarse).abs();
        quad_error += period_error;
        if period_error > 0.01 * opts.tol && period_error > 1e-13 * fine.abs() {
            converged = false;
        }
        partial += fine;
        terms.push_back(fine);
        sums.push_back(partial);
        if terms.len() > WINDOW {
            terms.pop_front();
            sums.pop_front();
        }
        if terms.len() < WINDOW {
            continue;
        }
        if terms.iter().all(|&x| x == 0.0) {
            // the amplitude has underflowed
            return Ok(Estimate {
                value: partial,
                error: quad_error,
                converged,
            });
        }
        let settled = terms
            .iter()
            .zip(terms.iter().skip(1))
            .all(|(x, y)| x.abs() > y.abs() && x.signum() != y.signum());
        if !settled {
            previous = None;
            continue;
        }
        for (slot, s) in buf.iter_mut().zip(sums.iter()) {
            *slot = *s;
        }
        for level in (1..WINDOW).rev() {
            for i in 0..level {
                buf[i] = 0.5 * (buf[i] + buf[i + 1]);
            }
        }
        let estimate = buf[0];
        if let Some(p) = previous {
            let shift = (estimate - p).abs();
            if shift <= opts.tol {
                return Ok(Estimate {
                    value: estimate,
                    error: shift + quad_error,
                    converged,
                });
            }
        }
        previous = Some(estimate);
    }
    Ok(Estimate {
        value: previous.unwrap_or(partial),
        error: f64::INFINITY,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn underflowing_amplitude() {
        let e = sine_tail(|t| (-400.0 * t).exp(), 1.0, TailOptions::new(1e-12)).unwrap();
        assert!(e.converged);
        assert!(e.value.abs() < 1e-170);
    }

    #[test]
    fn sine_integral_tail() {
        // ∫_1^∞ sin t / t dt = π/2 - Si(1)
        let si1 = 0.946_083_070_367_183_0;
        let e = sine_tail(|t| 1.0 / t, 1.0, TailOptions::new(1e-12)).unwrap();
        assert!(e.converged);
        assert!((e.value - (PI / 2.0 - si1)).abs() < 1e-11, "{}", e.value);
    }

    #[test]
    fn exponential_amplitude() {
        // ∫_0^∞ e^{-t/10} sin t dt = 1 / (1 + 1/100) … with a = 1/10: 1/(1+a²)
        let a: f64 = 0.1;
        let e = sine_tail(|t| (-a * t).exp(), 0.0, TailOptions::new(1e-12)).unwrap();
        assert!((e.value - 1.0 / (1.0 + a * a)).abs() < 1e-11);
    }

    #[test]
    fn rising_then_decaying_amplitude() {
        // ∫_0^∞ t e^{-t/20} sin t dt = Im 1/(1/20 - i)²
        let a = 0.05;
        let z = num_complex::Complex64::new(a, -1.0);
        let exact = (1.0 / (z * z)).im;
        let e = sine_tail(|t| t * (-a * t).exp(), 0.0, TailOptions::new(1e-10)).unwrap();
        assert!((e.value - exact).abs() < 1e-9, "{} vs {exact}", e.value);
    }

    #[test]
    fn non_decaying_amplitude_is_flagged() {
        let e = sine_tail(
            |_| 1.0,
            0.0,
            TailOptions {
                tol: 1e-10,
                max_periods: 500,
            },
        )
        .unwrap();
        assert!(!e.converged);
    }
}
