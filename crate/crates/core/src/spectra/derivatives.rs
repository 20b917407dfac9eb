//! Closed-form derivatives of the spectral test kernels at a point.
//!
//! Each kernel is kept as a finite sum of monomial-type terms whose derivative
//! is again such a sum, so `d^m/dx^m` is exact symbolic differentiation.

/// `d^m/dρ^m [2 ρ^{2k+1} (1-ρ²)^λ]` at `ρ0`, times `exp(ln_scale)`.
pub fn elliptic_kernel(k: u64, lambda: f64, order: u32, rho0: f64, ln_scale: f64) -> f64 {
    // c ρ^p (1-ρ²)^q  →  c p ρ^{p-1} (1-ρ²)^q  -  2 q c ρ^{p+1} (1-ρ²)^{q-1}
    let mut terms: Vec<(f64, f64, f64)> = vec![(2.0, 2.0 * k as f64 + 1.0, lambda)];
    for _ in 0..order {
        let mut next = Vec::with_capacity(2 * terms.len());
        for &(c, p, q) in &terms {
            if p != 0.0 {
                push_merge3(&mut next, (c * p, p - 1.0, q));
            }
            if q != 0.0 {
                push_merge3(&mut next, (-2.0 * q * c, p + 1.0, q - 1.0));
            }
        }
        terms = next;
    }
    let ln_r = rho0.ln();
    let ln_w = ((1.0 - rho0) * (1.0 + rho0)).ln();
    terms
        .iter()
        .map(|&(c, p, q)| c * (ln_scale + p * ln_r + q * ln_w).exp())
        .sum()
}

fn push_merge3(v: &mut Vec<(f64, f64, f64)>, t: (f64, f64, f64)) {
    match v.iter_mut().find(|e| e.1 == t.1 && e.2 == t.2) {
        Some(e) => e.0 += t.0,
        None => v.push(t),
    }
}

/// `d^m/ds^m [s^λ e^{-2ηs}]` at `y0`, times `exp(ln_scale)`.
pub fn parabolic_kernel(lambda: f64, eta: f64, order: u32, y0: f64, ln_scale: f64) -> f64 {
    // c s^p e^{-2ηs}  →  c p s^{p-1} e^{-2ηs}  -  2η c s^p e^{-2ηs}
    let mut terms: Vec<(f64, f64)> = vec![(1.0, lambda)];
    for _ in 0..order {
        let mut next: Vec<(f64, f64)> = Vec::with_capacity(terms.len() + 1);
        for &(c, p) in &terms {
            for t in [(c * p, p - 1.0), (-2.0 * eta * c, p)] {
                if t.0 == 0.0 {
                    continue;
                }
                match next.iter_mut().find(|e| e.1 == t.1) {
                    Some(e) => e.0 += t.0,
                    None => next.push(t),
                }
            }
        }
        terms = next;
    }
    let base = ln_scale - 2.0 * eta * y0;
    let ln_y = y0.ln();
    terms
        .iter()
        .map(|&(c, p)| c * (base + p * ln_y).exp())
        .sum()
}

/// `d^m/dθ^m [e^{-2ηθ} sin^λ θ]` at `θ0`, times `exp(ln_scale)`.
pub fn hyperbolic_kernel(lambda: f64, eta: f64, order: u32, theta0: f64, ln_scale: f64) -> f64 {
    // e^{-2ηθ} c S^a C^b  →  e^{-2ηθ} c (-2η S^a C^b + a S^{a-1} C^{b+1} - b S^{a+1} C^{b-1})
    let mut terms: Vec<(f64, f64, i32)> = vec![(1.0, lambda, 0)];
    for _ in 0..order {
        let mut next: Vec<(f64, f64, i32)> = Vec::with_capacity(3 * terms.len());
        for &(c, a, b) in &terms {
            let candidates = [
                (-2.0 * eta * c, a, b),
                (c * a, a - 1.0, b + 1),
                (-(b as f64) * c, a + 1.0, b - 1),
            ];
            for t in candidates {
                if t.0 == 0.0 {
                    continue;
                }
                match next.iter_mut().find(|e| e.1 == t.1 && e.2 == t.2) {
                    Some(e) => e.0 += t.0,
                    None => next.push(t),
                }
            }
        }
        terms = next;
    }
    let base = ln_scale - 2.0 * eta * theta0;
    let ln_s = theta0.sin().ln();
    let cos = theta0.cos();
    terms
        .iter()
        .map(|&(c, a, b)| c * (base + a * ln_s).exp() * if b == 0 { 1.0 } else { cos.powi(b) })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Five-point central difference for an independent check.
    fn fd(f: impl Fn(f64) -> f64, x: f64, order: u32, h: f64) -> f64 {
        match order {
            0 => f(x),
            1 => (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h),
            2 => {
                (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
                    / (12.0 * h * h)
            }
            3 => {
                (-f(x - 2.0 * h) + 2.0 * f(x - h) - 2.0 * f(x + h) + f(x + 2.0 * h))
                    / (2.0 * h * h * h)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn elliptic_matches_finite_differences() {
        for &(k, lambda, rho) in &[(0u64, 0.0, 0.5), (3, 1.5, 0.4), (7, -0.5, 0.8)] {
            let f = |r: f64| 2.0 * r.powi(2 * k as i32 + 1) * (1.0 - r * r).powf(lambda);
            for m in 0..=3 {
                let exact = elliptic_kernel(k, lambda, m, rho, 0.0);
                let approx = fd(f, rho, m, 2.5e-4);
                assert!(
                    (exact - approx).abs() < 1e-5 * (1.0 + exact.abs()),
                    "k={k} m={m}"
                );
            }
        }
        assert!((elliptic_kernel(0, 0.0, 0, 0.5, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parabolic_matches_finite_differences() {
        for &(lambda, eta, y) in &[(0.0, 0.5, 1.0), (2.5, 1.3, 0.7), (-0.5, 3.0, 2.0)] {
            let f = |s: f64| s.powf(lambda) * (-2.0 * eta * s).exp();
            for m in 0..=3 {
                let exact = parabolic_kernel(lambda, eta, m, y, 0.0);
                let approx = fd(f, y, m, 2.5e-4);
                assert!(
                    (exact - approx).abs() < 1e-5 * (1.0 + exact.abs()),
                    "λ={lambda} m={m}"
                );
            }
        }
    }

    #[test]
    fn hyperbolic_matches_finite_differences() {
        for &(lambda, eta, th) in &[(0.0, 1.0, 1.0), (1.5, -0.7, 2.0), (-0.5, 2.0, 0.6)] {
            let f = |t: f64| (-2.0 * eta * t).exp() * t.sin().powf(lambda);
            for m in 0..=3 {
                let exact = hyperbolic_kernel(lambda, eta, m, th, 0.0);
                let approx = fd(f, th, m, 2.5e-4);
                assert!(
                    (exact - approx).abs() < 1e-5 * (1.0 + exact.abs()),
                    "λ={lambda} m={m}"
                );
            }
        }
    }
}
