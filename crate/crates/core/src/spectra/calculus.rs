//! Functional calculus on sampled spectral functions.

use num_complex::Complex64;
use serde::Serialize;

use super::SpectralFunction;
use crate::error::{Error, Result};
use crate::symbols::Geometry;

/// A function sampled on a grid: either a spectral function or something
/// given in closed form, such as `φ(k) = (-1)^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    pub geometry: Option<Geometry>,
    pub points: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(
        geometry: Option<Geometry>,
        points: Vec<f64>,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::GridMismatch(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        Ok(GridFunction {
            geometry,
            points,
            values,
        })
    }

    pub fn from_fn(
        geometry: Option<Geometry>,
        points: Vec<f64>,
        f: impl Fn(f64) -> Complex64,
    ) -> Self {
        let values = points.iter().map(|&t| f(t)).collect();
        GridFunction {
            geometry,
            points,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl From<&SpectralFunction> for GridFunction {
    fn from(phi: &SpectralFunction) -> Self {
        GridFunction {
            geometry: Some(phi.geometry()),
            points: phi.points(),
            values: phi.values(),
        }
    }
}

/// Coefficients `f_k` of `Σ f_k e_k` (elliptic) or samples of a
/// transform-space function (parabolic, hyperbolic), on the same grid as the
/// function applied to it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalculusVector {
    pub points: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl CalculusVector {
    pub fn new(points: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::GridMismatch(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::param("calculus vector has non-finite entries"));
        }
        Ok(CalculusVector { points, values })
    }

    /// Coefficient vector on `k = 0, 1, …, n-1`.
    pub fn coefficients(values: Vec<Complex64>) -> Result<Self> {
        let points = (0..values.len()).map(|k| k as f64).collect();
        Self::new(points, values)
    }

    /// `Σ |v|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(Complex64::norm_sqr).sum()
    }
}

/// `φ(A) v`: multiply each coefficient (or transform-space sample) by `φ`.
pub fn apply_calculus(phi: &GridFunction, v: &CalculusVector) -> Result<CalculusVector> {
    if phi.points.len() != v.points.len()
        || phi
            .points
            .iter()
            .zip(&v.points)
            .any(|(a, b)| a.to_bits() != b.to_bits())
    {
        return Err(Error::GridMismatch(format!(
            "function grid has {} points, vector grid has {} (or they differ)",
            phi.points.len(),
            v.points.len()
        )));
    }
    let values = phi
        .values
        .iter()
        .zip(&v.values)
        .map(|(p, x)| p * x)
        .collect();
    CalculusVector::new(v.points.clone(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupNorm {
    pub value: f64,
    pub at: f64,
    /// Always true: the maximum over samples bounds the supremum from below.
    pub lower_bound: bool,
}

pub fn sup_norm(phi: &GridFunction) -> Result<SupNorm> {
    let (i, value) = phi
        .values
        .iter()
        .map(|v| v.norm())
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::InsufficientSampling("sup_norm of an empty grid".into()))?;
    Ok(SupNorm {
        value,
        at: phi.points[i],
        lower_bound: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompactnessVerdict {
    ConsistentWithCompact,
    NotCompact,
    Inconclusive,
}

impl std::fmt::Display for CompactnessVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CompactnessVerdict::ConsistentWithCompact => "consistent-with-compact",
            CompactnessVerdict::NotCompact => "not-compact",
            CompactnessVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompactnessReport {
    /// `max |φ|` over the last quarter of the grid.
    pub tail_max: f64,
    /// `max |φ|` over the first quarter of the grid.
    pub head_max: f64,
    pub verdict: CompactnessVerdict,
}

/// Ratio `tail/head` below which decay is called consistent with `φ → 0`.
pub const COMPACT_RATIO: f64 = 0.2;
/// Ratio at or above which the tail is called non-decaying.
pub const NON_COMPACT_RATIO: f64 = 0.5;

/// Heuristic `c_0` test. Only elliptic operators can be compact; in the other
/// geometries the verdict is `not-compact` unless `φ` vanishes on the grid.
pub fn compactness_estimate(phi: &GridFunction) -> Result<CompactnessReport> {
    let n = phi.len();
    if n == 0 {
        return Err(Error::InsufficientSampling(
            "compactness estimate of an empty grid".into(),
        ));
    }
    let quarter = n.div_ceil(4);
    let abs: Vec<f64> = phi.values.iter().map(|v| v.norm()).collect();
    let head_max = abs[..quarter].iter().copied().fold(0.0, f64::max);
    let tail_max = abs[n - quarter..].iter().copied().fold(0.0, f64::max);
    let all_max = abs.iter().copied().fold(0.0, f64::max);
    let verdict = if all_max <= 1e-14 {
        CompactnessVerdict::ConsistentWithCompact
    } else if phi.geometry != Some(Geometry::Elliptic) {
        CompactnessVerdict::NotCompact
    } else if tail_max < COMPACT_RATIO * head_max {
        CompactnessVerdict::ConsistentWithCompact
    } else if tail_max >= NON_COMPACT_RATIO * head_max {
        CompactnessVerdict::NotCompact
    } else {
        CompactnessVerdict::Inconclusive
    };
    Ok(CompactnessReport {
        tail_max,
        head_max,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn ks(n: usize) -> Vec<f64> {
        (0..n).map(|k| k as f64).collect()
    }

    #[test]
    fn identity_function_leaves_vector() {
        let phi = GridFunction::from_fn(Some(Geometry::Elliptic), ks(5), |_| c(1.0));
        let v = CalculusVector::coefficients(vec![
            c(1.0),
            c(-2.0),
            Complex64::new(0.5, 3.0),
            c(0.0),
            c(7.0),
        ])
        .unwrap();
        assert_eq!(apply_calculus(&phi, &v).unwrap(), v);
    }

    #[test]
    fn number_operator() {
        let phi = GridFunction::from_fn(Some(Geometry::Elliptic), ks(4), c);
        let v = CalculusVector::coefficients(vec![c(1.0), c(1.0), c(0.0), c(0.0)]).unwrap();
        let out = apply_calculus(&phi, &v).unwrap();
        assert_eq!(out.values, vec![c(0.0), c(1.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn reflection_is_an_involution() {
        let phi = GridFunction::from_fn(Some(Geometry::Elliptic), ks(101), |k| {
            c(if (k as u64) % 2 == 0 { 1.0 } else { -1.0 })
        });
        let v = CalculusVector::coefficients(
            (0..101)
                .map(|k| Complex64::new(k as f64, 1.0 / (1.0 + k as f64)))
                .collect(),
        )
        .unwrap();
        let twice = apply_calculus(&phi, &apply_calculus(&phi, &v).unwrap()).unwrap();
        assert_eq!(twice, v);
        assert_eq!(sup_norm(&phi).unwrap().value, 1.0);
    }

    #[test]
    fn indicator_functions_are_orthogonal_projections() {
        let n = 30;
        let chi = |set: fn(u64) -> bool| {
            GridFunction::from_fn(Some(Geometry::Elliptic), ks(n), move |k| {
                c(if set(k as u64) { 1.0 } else { 0.0 })
            })
        };
        let p = chi(|k| k % 3 == 0);
        let q = chi(|k| k % 3 != 0);
        let v =
            CalculusVector::coefficients((0..n).map(|k| Complex64::new(1.0, k as f64)).collect())
                .unwrap();
        let pv = apply_calculus(&p, &v).unwrap();
        assert_eq!(apply_calculus(&p, &pv).unwrap(), pv);
        let qpv = apply_calculus(&q, &pv).unwrap();
        assert!(qpv.values.iter().all(|x| x.norm() == 0.0));
        let qv = apply_calculus(&q, &v).unwrap();
        let sum: Vec<Complex64> = pv
            .values
            .iter()
            .zip(&qv.values)
            .map(|(a, b)| a + b)
            .collect();
        assert_eq!(sum, v.values);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let phi = GridFunction::from_fn(None, ks(3), |_| c(1.0));
        let v = CalculusVector::coefficients(vec![c(1.0); 4]).unwrap();
        assert!(matches!(
            apply_calculus(&phi, &v),
            Err(Error::GridMismatch(_))
        ));
        assert!(matches!(
            GridFunction::new(None, ks(2), vec![c(1.0)]),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn compactness_verdicts() {
        let one = GridFunction::from_fn(Some(Geometry::Elliptic), ks(201), |_| c(1.0));
        assert_eq!(
            compactness_estimate(&one).unwrap().verdict,
            CompactnessVerdict::NotCompact
        );
        let decay =
            GridFunction::from_fn(Some(Geometry::Elliptic), ks(201), |k| c(1.0 / (1.0 + k)));
        assert_eq!(
            compactness_estimate(&decay).unwrap().verdict,
            CompactnessVerdict::ConsistentWithCompact
        );
        let pts: Vec<f64> = (1..100).map(|i| i as f64 * 0.1).collect();
        let par = GridFunction::from_fn(Some(Geometry::Parabolic), pts.clone(), |t| c((-t).exp()));
        assert_eq!(
            compactness_estimate(&par).unwrap().verdict,
            CompactnessVerdict::NotCompact
        );
        let zero = GridFunction::from_fn(Some(Geometry::Parabolic), pts, |_| c(0.0));
        assert_eq!(
            compactness_estimate(&zero).unwrap().verdict,
            CompactnessVerdict::ConsistentWithCompact
        );
    }
}
