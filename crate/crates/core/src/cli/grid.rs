//! Grid specifications and number formatting for tables.
//!
//! Accepted forms:
//!
//! - `a:b` – every integer step from `a` to `b`, inclusive
//! - `a:b:n` – `n` equally spaced points from `a` to `b`, inclusive
//! - `geom:a:b:n` – `n` log-spaced points, `0 < a < b`
//! - `asinh:a:b:n` – `n` points equally spaced in `asinh`
//! - `x1,x2,...` – an explicit list (a single number is a one-point list)

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols::Geometry;

/// Upper bound on the number of grid points.
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    Steps { start: f64, stop: f64 },
    Linear { start: f64, stop: f64, count: usize },
    Geometric { start: f64, stop: f64, count: usize },
    Arcsinh { start: f64, stop: f64, count: usize },
    List { points: Vec<f64> },
}

fn number(field: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("grid: `{s}` in {field} is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!(
            "grid: {field} must be finite, got {s}"
        )))
    }
}

fn count(s: &str) -> Result<usize> {
    let n: usize = s
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("grid: point count `{s}` is not an integer")))?;
    if (2..=MAX_GRID_POINTS).contains(&n) {
        Ok(n)
    } else {
        Err(Error::Config(format!(
            "grid: point count must be in 2..={MAX_GRID_POINTS}, got {n}"
        )))
    }
}

impl GridSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Config("grid: empty specification".into()));
        }
        let parts: Vec<&str> = text.split(':').collect();
        let spec = match parts.as_slice() {
            ["geom", a, b, n] => GridSpec::Geometric {
                start: number("start", a)?,
                stop: number("stop", b)?,
                count: count(n)?,
            },
            ["asinh", a, b, n] => GridSpec::Arcsinh {
                start: number("start", a)?,
                stop: number("stop", b)?,
                count: count(n)?,
            },
            [a, b] => GridSpec::Steps {
                start: number("start", a)?,
                stop: number("stop", b)?,
            },
            [a, b, n] => GridSpec::Linear {
                start: number("start", a)?,
                stop: number("stop", b)?,
                count: count(n)?,
            },
            [list] => GridSpec::List {
                points: list
                    .split(',')
                    .map(|x| number("list", x))
                    .collect::<Result<_>>()?,
            },
            _ => return Err(Error::Config(format!("grid: cannot parse `{text}`"))),
        };
        spec.points()?;
        Ok(spec)
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        let ordered = |a: f64, b: f64| {
            if a < b {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "grid: start {a} must be below stop {b}"
                )))
            }
        };
        let spaced = |a: f64,
                      b: f64,
                      n: usize,
                      map: &dyn Fn(f64) -> f64,
                      inv: &dyn Fn(f64) -> f64|
         -> Vec<f64> {
            let (u, v) = (map(a), map(b));
            let mut out: Vec<f64> = (0..n)
                .map(|i| inv(u + (v - u) * i as f64 / (n - 1) as f64))
                .collect();
            // endpoints exactly as given
            out[0] = a;
            out[n - 1] = b;
            out
        };
        match *self {
            GridSpec::Steps { start, stop } => {
                ordered(start, stop)?;
                let n = (stop - start).floor() as usize + 1;
                if n > MAX_GRID_POINTS {
                    return Err(Error::Config(format!(
                        "grid: {n} points exceeds {MAX_GRID_POINTS}"
                    )));
                }
                Ok((0..n).map(|i| start + i as f64).collect())
            }
            GridSpec::Linear { start, stop, count } => {
                ordered(start, stop)?;
                Ok(spaced(start, stop, count, &|x| x, &|x| x))
            }
            GridSpec::Geometric { start, stop, count } => {
                ordered(start, stop)?;
                if start <= 0.0 {
                    return Err(Error::Config(format!(
                        "grid: geometric start must be positive, got {start}"
                    )));
                }
                Ok(spaced(start, stop, count, &f64::ln, &f64::exp))
            }
            GridSpec::Arcsinh { start, stop, count } => {
                ordered(start, stop)?;
                Ok(spaced(start, stop, count, &f64::asinh, &f64::sinh))
            }
            GridSpec::List { ref points } => {
                if points.is_empty() || points.len() > MAX_GRID_POINTS {
                    return Err(Error::Config(
                        "grid: list must hold 1..=1000000 points".into(),
                    ));
                }
                Ok(points.clone())
            }
        }
    }

    /// Checks that every point lies where the geometry's spectral function
    /// is defined.
    pub fn points_for(&self, geometry: Geometry) -> Result<Vec<f64>> {
        let points = self.points()?;
        for &t in &points {
            let ok = match geometry {
                Geometry::Elliptic => t >= 0.0 && t.fract() == 0.0,
                Geometry::Parabolic => t > 0.0,
                Geometry::Hyperbolic => true,
            };
            if !ok {
                let need = match geometry {
                    Geometry::Elliptic => "nonnegative integers",
                    Geometry::Parabolic => "positive",
                    Geometry::Hyperbolic => "finite",
                };
                return Err(Error::Config(format!(
                    "grid: {geometry} points must be {need}, got {t}"
                )));
            }
        }
        Ok(points)
    }
}

/// `x` with 15 significant digits, in the shortest of fixed or scientific
/// notation, trailing zeros removed.
pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `x` rounded to what [`format_value`] prints.
pub fn round_value(x: f64) -> f64 {
    format_value(x).parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_forms() {
        assert_eq!(GridSpec::parse("0:50").unwrap().points().unwrap().len(), 51);
        let lin = GridSpec::parse("0.1:10:200").unwrap().points().unwrap();
        assert_eq!((lin.len(), lin[0], lin[199]), (200, 0.1, 10.0));
        let geo = GridSpec::parse("geom:1e-3:1e3:7")
            .unwrap()
            .points()
            .unwrap();
        assert!((geo[3] - 1.0).abs() < 1e-15);
        let asinh = GridSpec::parse("asinh:-1e4:1e4:5")
            .unwrap()
            .points()
            .unwrap();
        assert_eq!(asinh[0], -1e4);
        assert!(asinh[2].abs() < 1e-9);
        assert_eq!(GridSpec::parse("0.5").unwrap().points().unwrap(), vec![0.5]);
        assert_eq!(
            GridSpec::parse("1, 2,3").unwrap().points().unwrap(),
            vec![1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn bad_grids() {
        for text in [
            "",
            "5:1",
            "0:1:1",
            "geom:0:1:10",
            "a:b",
            "1:2:3:4",
            "1,x",
            "0:1:2.5",
            "geom:1:10:x",
        ] {
            assert!(
                matches!(GridSpec::parse(text), Err(Error::Config(_))),
                "{text}"
            );
        }
        let g = GridSpec::parse("0:2:5").unwrap();
        assert!(g.points_for(Geometry::Elliptic).is_err());
        assert!(g.points_for(Geometry::Parabolic).is_err());
        assert!(g.points_for(Geometry::Hyperbolic).is_ok());
    }

    #[test]
    fn formatting() {
        assert_eq!(format_value(1.0), "1");
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(-0.0), "0");
        assert_eq!(format_value(0.5), "0.5");
        assert_eq!(format_value(1.0 / 3.0), "0.333333333333333");
        assert_eq!(format_value(2.0 / 3.0 * 1e-7), "6.66666666666667e-8");
        assert_eq!(format_value(123456789012345678.0), "1.23456789012346e17");
        assert_eq!(format_value(-0.367879441171442), "-0.367879441171442");
        assert_eq!(format_value(f64::NAN), "nan");
    }

    proptest! {
        #[test]
        fn fifteen_significant_digits(x in -1e30f64..1e30) {
            let back: f64 = format_value(x).parse().unwrap();
            prop_assert!((back - x).abs() <= 5e-15 * x.abs());
            prop_assert_eq!(format_value(back), format_value(x));
        }
    }
}
