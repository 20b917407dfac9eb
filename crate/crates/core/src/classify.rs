//! Sampled tests for slow oscillation.
//!
//! A function belongs to the relevant algebra when it is uniformly continuous
//! for one of three metrics: `|ln((j+1)/(k+1))|` on the integers, `|ln t - ln t'|`
//! on the positive half-line and `|asinh t - asinh t'|` on the line. Each
//! metric is the distance between images under a monotone coordinate map, so
//! after sorting by coordinate the pairs within `δ` form a sliding window.
//!
//! No finite sample proves a limit statement. The verdict looks at the
//! modulus at the smallest `δ` on blocks of increasingly large argument and
//! always reports the pair that attains it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::WeightParameter;
use crate::spectra::{half_pi_delta_forms, GridFunction};
use crate::symbols::Geometry;

pub const DEFAULT_DELTAS: [f64; 4] = [0.05, 0.1, 0.2, 0.4];
pub const DEFAULT_THRESHOLD: f64 = 0.05;
pub const MIN_SAMPLES: usize = 64;
/// Decades a log-metric sample has to span.
pub const MIN_DECADES: f64 = 4.0;
/// An arcsinh-metric sample has to reach `±ARCSINH_REACH`.
pub const ARCSINH_REACH: f64 = 1e4;
/// Number of blocks each tail is cut into.
const TAIL_BLOCKS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OscillationMetric {
    /// `|ln(j+1) - ln(k+1)|` on `Z_+`.
    AdjacentRatio,
    /// `|ln t - ln t'|` on `R_+`.
    Log,
    /// `|asinh t - asinh t'|` on `R`.
    Arcsinh,
}

impl OscillationMetric {
    pub fn for_geometry(geometry: Geometry) -> Self {
        match geometry {
            Geometry::Elliptic => OscillationMetric::AdjacentRatio,
            Geometry::Parabolic => OscillationMetric::Log,
            Geometry::Hyperbolic => OscillationMetric::Arcsinh,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "adjacent" | "adjacent_ratio" => Ok(OscillationMetric::AdjacentRatio),
            "log" => Ok(OscillationMetric::Log),
            "arcsinh" | "asinh" => Ok(OscillationMetric::Arcsinh),
            other => Err(Error::param(format!(
                "unknown metric `{other}` (expected adjacent, log or arcsinh)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OscillationMetric::AdjacentRatio => "adjacent",
            OscillationMetric::Log => "log",
            OscillationMetric::Arcsinh => "arcsinh",
        }
    }

    fn coordinate(self, t: f64) -> f64 {
        match self {
            OscillationMetric::AdjacentRatio => t.ln_1p(),
            OscillationMetric::Log => t.ln(),
            OscillationMetric::Arcsinh => t.asinh(),
        }
    }

    pub fn distance(self, t: f64, t_prime: f64) -> f64 {
        (self.coordinate(t) - self.coordinate(t_prime)).abs()
    }

    /// Coordinate values that split the sample into tails. The integer
    /// metric only has a tail at infinity.
    fn tails(self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        match self {
            OscillationMetric::AdjacentRatio => vec![(0.5 * (lo + hi), hi)],
            OscillationMetric::Log => {
                let mid = 0.5 * (lo + hi);
                vec![(mid, hi), (mid, lo)]
            }
            OscillationMetric::Arcsinh => vec![(0.0, hi), (0.0, lo)],
        }
    }

    fn check_sampling(self, points: &[f64]) -> Result<()> {
        if points.len() < MIN_SAMPLES {
            return Err(Error::InsufficientSampling(format!(
                "{} samples, at least {MIN_SAMPLES} are needed",
                points.len()
            )));
        }
        let lo = points.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match self {
            OscillationMetric::AdjacentRatio if lo < 0.0 => {
                Err(Error::param(format!("adjacent-ratio metric needs nonnegative indices, got {lo}")))
            }
            OscillationMetric::Log if lo <= 0.0 => {
                Err(Error::param(format!("log metric needs positive points, got {lo}")))
            }
            OscillationMetric::Log if (hi / lo).log10() < MIN_DECADES * (1.0 - 1e-12) => {
                Err(Error::InsufficientSampling(format!(
                    "log metric needs {MIN_DECADES} decades, sample spans [{lo}, {hi}]"
                )))
            }
            OscillationMetric::Arcsinh
                if lo > -ARCSINH_REACH * (1.0 - 1e-9) || hi < ARCSINH_REACH * (1.0 - 1e-9) =>
            {
                Err(Error::InsufficientSampling(format!(
                    "arcsinh metric needs the range [-{ARCSINH_REACH}, {ARCSINH_REACH}], sample spans [{lo}, {hi}]"
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub delta_grid: Vec<f64>,
    pub threshold: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            delta_grid: DEFAULT_DELTAS.to_vec(),
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl ClassifyOptions {
    fn validate(&self) -> Result<Vec<f64>> {
        let mut deltas = self.delta_grid.clone();
        if deltas.is_empty() || deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::param(format!(
                "δ grid must be nonempty and positive, got {deltas:?}"
            )));
        }
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::param(format!(
                "threshold must be positive, got {}",
                self.threshold
            )));
        }
        deltas.sort_by(f64::total_cmp);
        deltas.dedup();
        Ok(deltas)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "consistent-with-membership")]
    Consistent,
    #[serde(rename = "violates")]
    Violates,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent-with-membership",
            Verdict::Violates => "violates",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub t: f64,
    pub t_prime: f64,
    pub distance: f64,
    pub difference: f64,
}

/// Moduli at the smallest `δ` on consecutive blocks of one tail, ordered
/// outwards. `None` marks a block with no pair that close.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailSummary {
    pub from: f64,
    pub to: f64,
    pub block_modulus: Vec<Option<f64>>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationReport {
    pub metric: OscillationMetric,
    pub delta_grid: Vec<f64>,
    /// `sup |φ(t) - φ(t')|` over sampled pairs with `d(t, t') ≤ δ`.
    pub modulus: Vec<f64>,
    pub threshold: f64,
    pub verdict: Verdict,
    /// Pair attaining the modulus at the smallest `δ`.
    pub witness: Option<Witness>,
    pub tails: Vec<TailSummary>,
}

/// Largest jump among pairs of sorted samples whose coordinates differ by at
/// most `delta`, with the indices that attain it.
fn window_sup(
    coords: &[f64],
    values: &[Complex64],
    deltas: &[f64],
) -> Vec<Option<(f64, usize, usize)>> {
    let widest = *deltas.last().expect("nonempty δ grid");
    let per_start: Vec<Vec<Option<(f64, usize, usize)>>> = (0..coords.len())
        .into_par_iter()
        .map(|i| {
            let mut best = vec![None; deltas.len()];
            for j in i + 1..coords.len() {
                let d = coords[j] - coords[i];
                if d > widest {
                    break;
                }
                let jump = (values[j] - values[i]).norm();
                let slot = deltas.partition_point(|&delta| delta < d);
                if best[slot].is_none_or(|(b, _, _)| jump > b) {
                    best[slot] = Some((jump, i, j));
                }
            }
            best
        })
        .collect();
    let mut out: Vec<Option<(f64, usize, usize)>> = vec![None; deltas.len()];
    // deterministic reduction: earliest pair wins ties
    for best in per_start {
        for (o, b) in out.iter_mut().zip(best) {
            if let Some(b) = b {
                if o.is_none_or(|(v, _, _)| b.0 > v) {
                    *o = Some(b);
                }
            }
        }
    }
    // a pair within δ is within every larger δ
    for k in 1..out.len() {
        if let Some(prev) = out[k - 1] {
            if out[k].is_none_or(|(v, _, _)| prev.0 > v) {
                out[k] = Some(prev);
            }
        }
    }
    out
}

fn tail_verdict(blocks: &[Option<f64>], threshold: f64) -> Verdict {
    if blocks.iter().any(Option::is_none) {
        return Verdict::Inconclusive;
    }
    let m: Vec<f64> = blocks.iter().map(|b| b.unwrap_or(0.0)).collect();
    if m.iter().all(|&v| v > threshold) {
        Verdict::Violates
    } else if m[m.len() - 2..].iter().all(|&v| v < threshold) {
        Verdict::Consistent
    } else {
        Verdict::Inconclusive
    }
}

/// Sampled oscillation modulus of `f` for `metric` on the given `δ` grid.
pub fn oscillation_modulus(
    f: &GridFunction,
    metric: OscillationMetric,
    options: &ClassifyOptions,
) -> Result<OscillationReport> {
    let deltas = options.validate()?;
    if f.points.len() != f.values.len() {
        return Err(Error::GridMismatch(format!(
            "{} points but {} values",
            f.points.len(),
            f.values.len()
        )));
    }
    for (&t, v) in f.points.iter().zip(&f.values) {
        if !t.is_finite() {
            return Err(Error::param(format!("grid point {t} is not finite")));
        }
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite {
                at: t,
                value: if v.re.is_finite() { v.im } else { v.re },
            });
        }
    }
    metric.check_sampling(&f.points)?;
    let mut order: Vec<usize> = (0..f.points.len()).collect();
    order.sort_by(|&a, &b| f.points[a].total_cmp(&f.points[b]));
    let points: Vec<f64> = order.iter().map(|&i| f.points[i]).collect();
    let values: Vec<Complex64> = order.iter().map(|&i| f.values[i]).collect();
    let coords: Vec<f64> = points.iter().map(|&t| metric.coordinate(t)).collect();

    let sup = window_sup(&coords, &values, &deltas);
    let modulus = sup.iter().map(|s| s.map_or(0.0, |s| s.0)).collect();
    let witness = sup[0].map(|(jump, i, j)| Witness {
        t: points[i],
        t_prime: points[j],
        distance: coords[j] - coords[i],
        difference: jump,
    });

    let smallest = &deltas[..1];
    let (lo, hi) = (coords[0], coords[coords.len() - 1]);
    let mut tails = Vec::new();
    for (from, to) in metric.tails(lo, hi) {
        let step = (to - from) / TAIL_BLOCKS as f64;
        let block_modulus = (0..TAIL_BLOCKS)
            .map(|b| {
                let (x, y) = (from + b as f64 * step, from + (b + 1) as f64 * step);
                let (x, y) = if x <= y { (x, y) } else { (y, x) };
                let start = coords.partition_point(|&c| c < x);
                let end = coords.partition_point(|&c| c <= y);
                window_sup(&coords[start..end], &values[start..end], smallest)[0].map(|s| s.0)
            })
            .collect::<Vec<_>>();
        let verdict = tail_verdict(&block_modulus, options.threshold);
        tails.push(TailSummary {
            from,
            to,
            block_modulus,
            verdict,
        });
    }
    let verdict = if tails.iter().any(|t| t.verdict == Verdict::Violates) {
        Verdict::Violates
    } else if tails.iter().all(|t| t.verdict == Verdict::Consistent) {
        Verdict::Consistent
    } else {
        Verdict::Inconclusive
    };
    Ok(OscillationReport {
        metric,
        delta_grid: deltas,
        modulus,
        threshold: options.threshold,
        verdict,
        witness,
        tails,
    })
}

pub const BUILTINS: [&str; 3] = ["hmv", "reflection", "hyp_delta"];

/// Closed-form calibration functions on their default grids, with the metric
/// they are meant to be judged by.
pub fn builtin_calibration(name: &str) -> Result<(GridFunction, OscillationMetric)> {
    match name {
        "hmv" => {
            let n = 2048;
            let points = (0..n)
                .map(|i| 10f64.powf(6.0 * i as f64 / (n - 1) as f64))
                .collect();
            let f = GridFunction::from_fn(Some(Geometry::Parabolic), points, |eta| {
                let phase = eta.ln_1p().powi(2) / (3.0 * PI);
                Complex64::from_polar(eta / (eta + 1.0), phase)
            });
            Ok((f, OscillationMetric::Log))
        }
        "reflection" => {
            let points = (0..=10_000).map(f64::from).collect();
            let f = GridFunction::from_fn(Some(Geometry::Elliptic), points, |k| {
                Complex64::new(if (k as u64) % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
            });
            Ok((f, OscillationMetric::AdjacentRatio))
        }
        "hyp_delta" => {
            let n = 2001;
            let reach = ARCSINH_REACH.asinh();
            let mut points: Vec<f64> = (0..n)
                .map(|i| (-reach + 2.0 * reach * i as f64 / (n - 1) as f64).sinh())
                .collect();
            points[0] = -ARCSINH_REACH;
            points[n - 1] = ARCSINH_REACH;
            points[n / 2] = 0.0;
            let lambda = WeightParameter::new(0.0)?;
            let values = points
                .iter()
                .map(|&eta| {
                    half_pi_delta_forms(lambda, eta).map(|f| Complex64::new(f.via_vartheta, 0.0))
                })
                .collect::<Result<_>>()?;
            Ok((
                GridFunction::new(Some(Geometry::Hyperbolic), points, values)?,
                OscillationMetric::Arcsinh,
            ))
        }
        other => Err(Error::UnknownSymbol(format!(
            "{other} (calibrations: {})",
            BUILTINS.join(", ")
        ))),
    }
}
