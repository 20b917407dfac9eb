//! Run configuration: a TOML file of flat keys, overridden field by field by
//! command-line flags, validated before anything is computed.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use crate::classify::{ClassifyOptions, OscillationMetric};
use crate::error::{Error, Result};
use crate::specfun::WeightParameter;
use crate::spectra::{SpectralOptions, DEFAULT_TOL};
use crate::symbols::{Geometry, SymbolSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "field `format`: expected csv or json, got `{other}`"
            ))),
        }
    }
}

/// Every setting any subcommand reads. Unset fields fall back to the
/// subcommand's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    /// Truncated matrix size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// Spectral cut of the resolution of identity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Evaluation points, as `a+bi` strings.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub packet_center: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub packet_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        RunConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// `self` with every field that `flags` sets replaced.
    pub fn overridden_by(self, flags: RunConfig) -> RunConfig {
        let base = self;
        overlay!(base, flags; geometry, lambda, symbol, grid, tol, out, format, n, mu, nu, eta, z,
            packet_center, packet_width, builtin, input, metric, threshold, deltas)
    }

    pub fn geometry(&self) -> Result<Geometry> {
        let text = self
            .geometry
            .as_deref()
            .ok_or_else(|| missing("geometry"))?;
        text.parse()
            .map_err(|_| Error::Config(format!("field `geometry`: unknown geometry `{text}`")))
    }

    pub fn lambda(&self) -> Result<WeightParameter> {
        let l = self.lambda.unwrap_or(0.0);
        WeightParameter::new(l)
            .map_err(|_| Error::Config(format!("field `lambda`: must be finite and > -1, got {l}")))
    }

    pub fn symbol(
        &self,
        geometry: Geometry,
        default: Option<&str>,
    ) -> Result<(String, SymbolSpec)> {
        let text = self
            .symbol
            .as_deref()
            .or(default)
            .ok_or_else(|| missing("symbol"))?;
        let spec = SymbolSpec::parse(geometry, text)
            .map_err(|e| Error::Config(format!("field `symbol`: {e}")))?;
        Ok((text.to_string(), spec))
    }

    pub fn grid(&self, geometry: Geometry) -> Result<Vec<f64>> {
        let text = self.grid.as_deref().ok_or_else(|| missing("grid"))?;
        GridSpec::parse(text)
            .and_then(|g| g.points_for(geometry))
            .map_err(|e| Error::Config(format!("field `grid`: {}", strip(e))))
    }

    pub fn tol(&self, default: f64) -> Result<f64> {
        positive("tol", self.tol.unwrap_or(default))
    }

    pub fn spectral_options(&self) -> Result<SpectralOptions> {
        Ok(SpectralOptions {
            tol: self.tol(DEFAULT_TOL)?,
        })
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or_default()
    }

    pub fn mu(&self) -> Result<f64> {
        positive("mu", self.mu.unwrap_or(1.0))
    }

    pub fn nu(&self, default: f64) -> Result<f64> {
        positive("nu", self.nu.unwrap_or(default))
    }

    pub fn eta(&self) -> Result<f64> {
        let eta = self.eta.ok_or_else(|| missing("eta"))?;
        if eta.is_finite() {
            Ok(eta)
        } else {
            Err(Error::Config(format!(
                "field `eta`: must be finite, got {eta}"
            )))
        }
    }

    pub fn points_z(&self, default: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.z {
            None => Ok(default.to_vec()),
            Some(list) => list
                .iter()
                .map(|s| {
                    parse_complex(s).map_err(|e| Error::Config(format!("field `z`: {}", strip(e))))
                })
                .collect(),
        }
    }

    pub fn packet(&self, center: f64, width: f64) -> Result<(f64, f64)> {
        let c = self.packet_center.unwrap_or(center);
        if !c.is_finite() {
            return Err(Error::Config(format!(
                "field `packet_center`: must be finite, got {c}"
            )));
        }
        Ok((
            c,
            positive("packet_width", self.packet_width.unwrap_or(width))?,
        ))
    }

    pub fn metric(&self) -> Result<Option<OscillationMetric>> {
        self.metric
            .as_deref()
            .map(|m| {
                OscillationMetric::parse(m)
                    .map_err(|e| Error::Config(format!("field `metric`: {}", strip(e))))
            })
            .transpose()
    }

    pub fn classify_options(&self) -> Result<ClassifyOptions> {
        let mut opts = ClassifyOptions::default();
        if let Some(t) = self.threshold {
            opts.threshold = positive("threshold", t)?;
        }
        if let Some(d) = &self.deltas {
            if d.is_empty() {
                return Err(Error::Config("field `deltas`: must not be empty".into()));
            }
            for &x in d {
                positive("deltas", x)?;
            }
            opts.delta_grid = d.clone();
        }
        Ok(opts)
    }
}

fn missing(field: &str) -> Error {
    Error::Config(format!("field `{field}` is required"))
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Config(format!(
            "field `{field}`: must be positive, got {v}"
        )))
    }
}

/// Drop the "configuration error:" prefix when nesting messages.
fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

/// `a`, `bi`, `a+bi`, `a-bi`, with `i` alone meaning `1i`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Config(format!("`{text}` is not a complex number"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    // split the imaginary part at the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    if re.is_finite() && im.is_finite() {
        Ok(Complex64::new(re, im))
    } else {
        Err(bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = RunConfig::from_toml(
            "geometry = \"parabolic\"\nlambda = 1.5\nsymbol = \"constant:1\"\n",
        )
        .unwrap();
        let flags = RunConfig {
            lambda: Some(0.0),
            grid: Some("1:3".into()),
            ..Default::default()
        };
        let c = file.overridden_by(flags);
        assert_eq!(c.geometry.as_deref(), Some("parabolic"));
        assert_eq!(c.lambda, Some(0.0));
        assert_eq!(c.grid(Geometry::Parabolic).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let e = RunConfig::from_toml("lambda = 1\nlamda = 2\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("lamda") && e.contains("line 2"), "{e}");
        let e = RunConfig::from_toml("lambda = \"x\"\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 1"), "{e}");
        let c = RunConfig {
            lambda: Some(-1.0),
            ..Default::default()
        };
        assert!(c.lambda().unwrap_err().to_string().contains("`lambda`"));
        let c = RunConfig {
            geometry: Some("spherical".into()),
            ..Default::default()
        };
        assert!(c.geometry().unwrap_err().to_string().contains("`geometry`"));
        let c = RunConfig {
            symbol: Some("bogus:1".into()),
            ..Default::default()
        };
        assert!(c
            .symbol(Geometry::Elliptic, None)
            .unwrap_err()
            .to_string()
            .contains("`symbol`"));
        assert!(RunConfig::default()
            .grid(Geometry::Elliptic)
            .unwrap_err()
            .to_string()
            .contains("required"));
        let c = RunConfig {
            tol: Some(0.0),
            ..Default::default()
        };
        assert!(c.tol(1e-9).is_err());
    }

    #[test]
    fn complex_numbers() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("1+i").unwrap(), c(1.0, 1.0));
        assert_eq!(parse_complex("1 - 2.5i").unwrap(), c(1.0, -2.5));
        assert_eq!(parse_complex("-3i").unwrap(), c(0.0, -3.0));
        assert_eq!(parse_complex("2").unwrap(), c(2.0, 0.0));
        assert_eq!(parse_complex("1e-3+2e+1i").unwrap(), c(1e-3, 20.0));
        for bad in ["", "x", "1+xi", "ii"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }
}
