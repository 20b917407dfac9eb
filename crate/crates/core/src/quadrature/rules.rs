//! Gaussian rules from three-term recurrences.
//!
//! Nodes are the eigenvalues of the Jacobi matrix (implicit QL), polished by
//! Newton steps on the monic recurrence. Weights come from the Christoffel
//! formula `w_i = 1 / Σ_j p_j(x_i)²` over the orthonormal polynomials, which
//! keeps tiny weights accurate in the relative sense (the usual
//! first-eigenvector-component formula only gives them absolutely).

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{self, WeightParameter};

pub const MAX_JACOBI_ORDER: usize = 512;
/// Beyond this order the largest Laguerre weights underflow `f64`.
pub const MAX_LAGUERRE_ORDER: usize = 160;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Family {
    /// `(1 - r)^λ` on `[0, 1]`.
    Jacobi01 { lambda: f64 },
    /// `(1 - x)^α (1 + x)^β` on `[-1, 1]`.
    Jacobi { alpha: f64, beta: f64 },
    /// `y^λ e^{-y}` on `(0, ∞)`.
    GeneralizedLaguerre { lambda: f64 },
    /// Unit weight on `[-1, 1]`.
    Legendre,
}

impl Family {
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Family::Jacobi01 { .. } => (0.0, 1.0),
            Family::Jacobi { .. } | Family::Legendre => (-1.0, 1.0),
            Family::GeneralizedLaguerre { .. } => (0.0, f64::INFINITY),
        }
    }

    fn max_order(&self) -> usize {
        match self {
            Family::GeneralizedLaguerre { .. } => MAX_LAGUERRE_ORDER,
            _ => MAX_JACOBI_ORDER,
        }
    }

    /// Total mass `∫ w`.
    pub fn mass(&self) -> f64 {
        self.ln_mass().exp()
    }

    fn ln_mass(&self) -> f64 {
        match *self {
            Family::Jacobi01 { lambda } => -(lambda + 1.0).ln(),
            Family::Jacobi { alpha, beta } => {
                (alpha + beta + 1.0) * std::f64::consts::LN_2
                    + specfun::ln_gamma_unchecked(alpha + 1.0)
                    + specfun::ln_gamma_unchecked(beta + 1.0)
                    - specfun::ln_gamma_unchecked(alpha + beta + 2.0)
            }
            Family::GeneralizedLaguerre { lambda } => specfun::ln_gamma_unchecked(lambda + 1.0),
            Family::Legendre => std::f64::consts::LN_2,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > -1.0;
        let good = match *self {
            Family::Jacobi01 { lambda } | Family::GeneralizedLaguerre { lambda } => ok(lambda),
            Family::Jacobi { alpha, beta } => ok(alpha) && ok(beta),
            Family::Legendre => true,
        };
        if good {
            Ok(())
        } else {
            Err(Error::param(format!(
                "weight exponents of {self} must exceed -1"
            )))
        }
    }

    /// Monic recurrence `p_{j+1} = (x - a_j) p_j - b_j p_{j-1}`; returns
    /// `(a_0..a_{n-1}, b_0..b_{n-1})` with `b_0` unused.
    fn recurrence(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        match *self {
            Family::Legendre => {
                for j in 1..n {
                    let j2 = (j * j) as f64;
                    b[j] = j2 / (4.0 * j2 - 1.0);
                }
            }
            Family::GeneralizedLaguerre { lambda } => {
                for j in 0..n {
                    let jf = j as f64;
                    a[j] = 2.0 * jf + lambda + 1.0;
                    b[j] = jf * (jf + lambda);
                }
            }
            Family::Jacobi { alpha, beta } => jacobi_recurrence(alpha, beta, &mut a, &mut b),
            Family::Jacobi01 { lambda } => {
                jacobi_recurrence(lambda, 0.0, &mut a, &mut b);
                for j in 0..n {
                    a[j] = 0.5 * (a[j] + 1.0);
                    b[j] *= 0.25;
                }
            }
        }
        (a, b)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Jacobi01 { lambda } => write!(f, "jacobi01(λ={lambda})"),
            Family::Jacobi { alpha, beta } => write!(f, "jacobi(α={alpha}, β={beta})"),
            Family::GeneralizedLaguerre { lambda } => write!(f, "laguerre(λ={lambda})"),
            Family::Legendre => write!(f, "legendre"),
        }
    }
}

fn jacobi_recurrence(alpha: f64, beta: f64, a: &mut [f64], b: &mut [f64]) {
    let n = a.len();
    let s = alpha + beta;
    a[0] = (beta - alpha) / (s + 2.0);
    if n > 1 {
        b[1] = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + s).powi(2) * (3.0 + s));
    }
    for j in 1..n {
        let jf = j as f64;
        let t = 2.0 * jf + s;
        a[j] = if (beta * beta - alpha * alpha) == 0.0 {
            0.0
        } else {
            (beta * beta - alpha * alpha) / (t * (t + 2.0))
        };
        if j >= 2 {
            b[j] =
                4.0 * jf * (jf + alpha) * (jf + beta) * (jf + s) / (t * t * (t + 1.0) * (t - 1.0));
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadratureRule {
    pub family: Family,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    pub fn new(family: Family, n: usize) -> Result<Self> {
        family.validate()?;
        if n == 0 || n > family.max_order() {
            return Err(Error::param(format!(
                "{family}: order must be in 1..={}, got {n}",
                family.max_order()
            )));
        }
        let (a, b) = family.recurrence(n);
        let mut nodes = tridiagonal_eigenvalues(&a, &b)?;
        nodes.sort_by(f64::total_cmp);
        polish_nodes(&a, &b, &mut nodes);
        let ln_mass = family.ln_mass();
        let weights: Vec<f64> = nodes
            .iter()
            .map(|&x| (ln_mass - ln_christoffel_sum(&a, &b, x)).exp())
            .collect();
        let rule = QuadratureRule {
            family,
            nodes,
            weights,
            order: n,
        };
        rule.check()?;
        Ok(rule)
    }

    /// Polynomial exactness degree `2n - 1`.
    pub fn degree(&self) -> usize {
        2 * self.order - 1
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    fn check(&self) -> Result<()> {
        let (lo, hi) = self.family.domain();
        let fail = |what: &str| {
            Err(Error::Quadrature(format!(
                "{} rule of order {}: {what}",
                self.family, self.order
            )))
        };
        if self.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return fail("non-positive or non-finite weight");
        }
        if self.nodes.iter().any(|&x| !(x > lo && x < hi)) {
            return fail("node outside the open domain");
        }
        if self.nodes.windows(2).any(|p| !(p[0] < p[1])) {
            return fail("nodes not strictly increasing");
        }
        Ok(())
    }
}

pub fn build_jacobi01(n: usize, lambda: WeightParameter) -> Result<QuadratureRule> {
    QuadratureRule::new(
        Family::Jacobi01 {
            lambda: lambda.value(),
        },
        n,
    )
}

pub fn build_generalized_laguerre(n: usize, lambda: WeightParameter) -> Result<QuadratureRule> {
    QuadratureRule::new(
        Family::GeneralizedLaguerre {
            lambda: lambda.value(),
        },
        n,
    )
}

pub fn build_jacobi(n: usize, alpha: f64, beta: f64) -> Result<QuadratureRule> {
    QuadratureRule::new(Family::Jacobi { alpha, beta }, n)
}

pub fn build_legendre(n: usize) -> Result<QuadratureRule> {
    QuadratureRule::new(Family::Legendre, n)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `a` and
/// squared off-diagonal `b[1..]`, by QL with implicit Wilkinson shifts.
fn tridiagonal_eigenvalues(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    const MAX_SWEEPS: usize = 60;
    let n = a.len();
    let mut d = a.to_vec();
    let mut e = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        e[i] = b[i + 1].sqrt();
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::Convergence {
                    what: "tridiagonal QL",
                    iterations: MAX_SWEEPS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let bb = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - bb;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// `(p_n(x), p_n'(x))` of the monic recurrence, rescaled by a common positive
/// factor so the ratio is safe from overflow and underflow (on `[0, 1]` the
/// monic polynomials shrink like `4^{-n}`).
fn monic_value_and_derivative(a: &[f64], b: &[f64], x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (0.0, 1.0);
    let (mut d0, mut d1) = (0.0, 0.0);
    for j in 0..a.len() {
        let p2 = (x - a[j]) * p1 - b[j] * p0;
        let d2 = p1 + (x - a[j]) * d1 - b[j] * d0;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
        let scale = p1.abs().max(d1.abs());
        if scale > 1e100 || (scale < 1e-100 && scale > 0.0) {
            p0 /= scale;
            p1 /= scale;
            d0 /= scale;
            d1 /= scale;
        }
    }
    (p1, d1)
}

fn polish_nodes(a: &[f64], b: &[f64], nodes: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n {
        let lo = if i > 0 {
            nodes[i - 1]
        } else {
            f64::NEG_INFINITY
        };
        let hi = if i + 1 < n {
            nodes[i + 1]
        } else {
            f64::INFINITY
        };
        let mut x = nodes[i];
        for _ in 0..3 {
            let (p, dp) = monic_value_and_derivative(a, b, x);
            if dp == 0.0 || !p.is_finite() || !dp.is_finite() {
                break;
            }
            let next = x - p / dp;
            if !(next > lo && next < hi) || (next - x).abs() > 1e-6 * (1.0 + x.abs()) {
                break;
            }
            x = next;
        }
        nodes[i] = x;
    }
}

/// `ln Σ_{j<n} q_j(x)²` where `q_j = p_j / ‖p_j‖` and `‖p_0‖ = 1`; the mass is
/// accounted for by the caller.
fn ln_christoffel_sum(a: &[f64], b: &[f64], x: f64) -> f64 {
    let n = a.len();
    let mut log_scale = 0.0;
    let (mut q_prev, mut q) = (0.0, 1.0);
    let mut sum = 1.0;
    for j in 0..n - 1 {
        let beta_next = b[j + 1].sqrt();
        let beta = if j > 0 { b[j].sqrt() } else { 0.0 };
        let q_next = ((x - a[j]) * q - beta * q_prev) / beta_next;
        q_prev = q;
        q = q_next;
        sum += q * q;
        if q.abs() > 1e100 {
            q_prev /= 1e100;
            q /= 1e100;
            sum /= 1e200;
            log_scale += 200.0 * std::f64::consts::LN_10;
        }
    }
    sum.ln() + log_scale
}
