//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 failed verification.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{
    builtin_calibration, oscillation_modulus, OscillationMetric, OscillationReport,
};
use crate::error::{Error, Result};
use crate::spectra::{
    compactness_estimate, spectral_function, sup_norm, CompactnessReport, GridFunction, SupNorm,
};

pub mod config;
pub mod grid;
pub mod output;
pub mod verify;

pub use config::{OutputFormat, RunConfig};
pub use grid::GridSpec;
pub use output::{Row, RowFlag, Table, TableHeader};
pub use verify::{run_case, VerifyCase, VerifyReport};

/// Caps the worker pool when set to a positive integer.
pub const THREADS_ENV: &str = "TOEPLITZ_SPECTRA_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Config = 2,
    Numerical = 3,
    Verification = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn for_error(e: &Error) -> Self {
        match e {
            Error::Convergence { .. } | Error::Quadrature(_) | Error::NonFinite { .. } => {
                ExitStatus::Numerical
            }
            _ => ExitStatus::Config,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "toeplitz-spectra",
    version,
    about = "Spectral functions of invariant Toeplitz operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the spectral function of a symbol.
    Gamma(CommonArgs),
    /// Compare a spectral formula with a direct Bergman-space computation.
    Verify {
        #[arg(value_enum)]
        case: VerifyCase,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Test a sampled function for slow oscillation.
    Classify(CommonArgs),
    /// Run the acceptance battery.
    Selftest,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub geometry: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub symbol: Option<String>,
    /// `a:b`, `a:b:n`, `geom:a:b:n`, `asinh:a:b:n` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
    /// Matrix size.
    #[arg(long = "N", visible_alias = "n")]
    pub n: Option<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Evaluation point `a+bi`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Vec<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub packet_center: Option<f64>,
    #[arg(long)]
    pub packet_width: Option<f64>,
    #[arg(long)]
    pub builtin: Option<String>,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Comma-separated δ grid.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Vec<f64>,
}

impl CommonArgs {
    /// The config file (if any) overridden by the flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            geometry: self.geometry.clone(),
            lambda: self.lambda,
            symbol: self.symbol.clone(),
            grid: self.grid.clone(),
            tol: self.tol,
            out: self.out.clone(),
            format: self
                .format
                .as_deref()
                .map(OutputFormat::parse)
                .transpose()?,
            n: self.n,
            mu: self.mu,
            nu: self.nu,
            eta: self.eta,
            z: (!self.z.is_empty()).then(|| self.z.clone()),
            packet_center: self.packet_center,
            packet_width: self.packet_width,
            builtin: self.builtin.clone(),
            input: self.input.clone(),
            metric: self.metric.clone(),
            threshold: self.threshold,
            deltas: (!self.deltas.is_empty()).then(|| self.deltas.clone()),
        };
        Ok(base.overridden_by(flags))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaSummary {
    pub sup_norm: SupNorm,
    pub compactness_estimate: CompactnessReport,
    pub unconverged: usize,
    pub failed: usize,
}

#[derive(Debug, Clone)]
pub struct GammaOutcome {
    pub text: String,
    pub summary: GammaSummary,
    pub status: ExitStatus,
}

/// Evaluates the table described by `config` and renders it. Points that
/// fail numerically are kept with the `failed` flag.
pub fn gamma_table(config: &RunConfig) -> Result<GammaOutcome> {
    let geometry = config.geometry()?;
    let lambda = config.lambda()?;
    let (text, symbol) = config.symbol(geometry, None)?;
    let grid = config.grid(geometry)?;
    let options = config.spectral_options()?;
    let format = config.format();
    let phi = spectral_function(&symbol, lambda, &[], options)?;
    let rows: Vec<Row> = grid
        .par_iter()
        .map(|&t| match phi.evaluate(t) {
            Ok(e) if e.value.is_finite() => {
                let flag = if e.converged {
                    RowFlag::Ok
                } else {
                    RowFlag::Unconverged
                };
                Row::new(t, Complex64::new(e.value, 0.0), flag)
            }
            _ => Row::new(t, Complex64::new(f64::NAN, f64::NAN), RowFlag::Failed),
        })
        .collect();
    let ok_rows: Vec<&Row> = rows.iter().filter(|r| r.flag != RowFlag::Failed).collect();
    let sampled = GridFunction {
        geometry: Some(geometry),
        points: ok_rows.iter().map(|r| r.grid_point).collect(),
        values: ok_rows.iter().map(|r| Complex64::new(r.re, r.im)).collect(),
    };
    let failed = rows.len() - ok_rows.len();
    let unconverged = rows
        .iter()
        .filter(|r| r.flag == RowFlag::Unconverged)
        .count();
    if sampled.is_empty() {
        return Err(Error::Quadrature(format!(
            "no grid point of `{text}` could be evaluated"
        )));
    }
    let summary = GammaSummary {
        sup_norm: sup_norm(&sampled)?,
        compactness_estimate: compactness_estimate(&sampled)?,
        unconverged,
        failed,
    };
    let header = TableHeader::new(geometry, lambda.value(), text);
    let rendered = match format {
        OutputFormat::Csv => output::render_csv(&header, &rows),
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Payload<'a> {
                #[serde(flatten)]
                table: output::GammaPayload<'a>,
                summary: &'a GammaSummary,
            }
            output::render_json(
                "gamma",
                config,
                &Payload {
                    table: output::GammaPayload::new(&header, &rows),
                    summary: &summary,
                },
            )?
        }
    };
    let status = if failed + unconverged > 0 {
        ExitStatus::Numerical
    } else {
        ExitStatus::Ok
    };
    Ok(GammaOutcome {
        text: rendered,
        summary,
        status,
    })
}

pub fn cmd_gamma(config: &RunConfig) -> Result<ExitStatus> {
    let outcome = gamma_table(config)?;
    output::emit(config.out.as_deref(), &outcome.text)?;
    let s = &outcome.summary;
    let line = format!(
        "sup_norm={} at={} compactness_estimate={} tail_max={} head_max={} unconverged={} failed={}",
        grid::format_value(s.sup_norm.value),
        grid::format_value(s.sup_norm.at),
        s.compactness_estimate.verdict,
        grid::format_value(s.compactness_estimate.tail_max),
        grid::format_value(s.compactness_estimate.head_max),
        s.unconverged,
        s.failed
    );
    if config.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(outcome.status)
}

pub fn cmd_verify(case: VerifyCase, config: &RunConfig) -> Result<ExitStatus> {
    let report = run_case(case, config)?;
    let text = output::render_json("verify", config, &report)?;
    output::emit(config.out.as_deref(), &text)?;
    if config.out.is_some() {
        for c in &report.checks {
            println!(
                "{} {} rel_err={}",
                if c.passed { "PASS" } else { "FAIL" },
                c.label,
                grid::format_value(c.comparison.rel_err)
            );
        }
    }
    Ok(if report.passed {
        ExitStatus::Ok
    } else {
        ExitStatus::Verification
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyPayload {
    pub source: String,
    pub samples: usize,
    pub report: OscillationReport,
}

pub fn classify_report(config: &RunConfig) -> Result<ClassifyPayload> {
    let (source, function, default_metric) = match (&config.builtin, &config.input) {
        (Some(name), None) => {
            let (f, m) = builtin_calibration(name)
                .map_err(|e| Error::Config(format!("field `builtin`: {e}")))?;
            (format!("builtin:{name}"), f, Some(m))
        }
        (None, Some(path)) => {
            let table = Table::read(path)?;
            let f = table.grid_function();
            let m = OscillationMetric::for_geometry(table.header.geometry);
            (path.display().to_string(), f, Some(m))
        }
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "give either `builtin` or `input`, not both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Config(
                "one of `builtin` or `input` is required".into(),
            ))
        }
    };
    let metric = config
        .metric()?
        .or(default_metric)
        .ok_or_else(|| Error::Config("field `metric` is required".into()))?;
    let report = oscillation_modulus(&function, metric, &config.classify_options()?)?;
    Ok(ClassifyPayload {
        source,
        samples: function.len(),
        report,
    })
}

pub fn cmd_classify(config: &RunConfig) -> Result<ExitStatus> {
    let payload = classify_report(config)?;
    let text = output::render_json("classify", config, &payload)?;
    output::emit(config.out.as_deref(), &text)?;
    if config.out.is_some() {
        println!(
            "verdict={} metric={}",
            payload.report.verdict.name(),
            payload.report.metric.name()
        );
    }
    Ok(ExitStatus::Ok)
}

pub fn cmd_selftest() -> ExitStatus {
    let outcomes = crate::acceptance::run_all();
    for o in &outcomes {
        println!("{}", o.line());
    }
    if outcomes.iter().all(|o| o.passed) {
        ExitStatus::Ok
    } else {
        ExitStatus::Verification
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got `{value}`"
            ))
        })?;
    // a pool that already exists keeps its size
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                ExitStatus::Config.code()
            } else {
                0
            };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Gamma(args) => args.resolve().and_then(|c| cmd_gamma(&c)),
        Command::Verify { case, common } => common.resolve().and_then(|c| cmd_verify(*case, &c)),
        Command::Classify(args) => args.resolve().and_then(|c| cmd_classify(&c)),
        Command::Selftest => Ok(cmd_selftest()),
    });
    match result {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::for_error(&e).code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("toeplitz-spectra").chain(args.iter().copied()))
            .unwrap()
    }

    #[test]
    fn flags_parse() {
        let cli = parse(&[
            "gamma",
            "--geometry",
            "hyperbolic",
            "--lambda",
            "-0.5",
            "--grid",
            "-10:10:401",
        ]);
        let Command::Gamma(a) = cli.command else {
            panic!()
        };
        let c = a.resolve().unwrap();
        assert_eq!(c.lambda, Some(-0.5));
        assert_eq!(c.grid.as_deref(), Some("-10:10:401"));
        let cli = parse(&[
            "verify",
            "elliptic-diag",
            "--N",
            "16",
            "--z",
            "1+i",
            "--z",
            "i",
            "--deltas",
            "0.1,0.2",
        ]);
        let Command::Verify { case, common } = cli.command else {
            panic!()
        };
        assert_eq!(case, VerifyCase::EllipticDiag);
        let c = common.resolve().unwrap();
        assert_eq!(
            (c.n, c.z.unwrap().len(), c.deltas.unwrap().len()),
            (Some(16), 2, 2)
        );
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            run(["toeplitz-spectra", "gamma", "--geometry", "elliptic"]),
            2
        );
        assert_eq!(run(["toeplitz-spectra", "frobnicate"]), 2);
        assert_eq!(
            run(["toeplitz-spectra", "classify", "--builtin", "nope"]),
            2
        );
        assert_eq!(
            ExitStatus::for_error(&Error::Quadrature("x".into())),
            ExitStatus::Numerical
        );
    }

    #[test]
    fn elliptic_constant_table() {
        let c = RunConfig {
            geometry: Some("elliptic".into()),
            symbol: Some("constant:1".into()),
            grid: Some("0:50".into()),
            ..Default::default()
        };
        let out = gamma_table(&c).unwrap();
        assert_eq!(out.status, ExitStatus::Ok);
        let t = Table::parse(&out.text).unwrap();
        assert_eq!(t.rows.len(), 51);
        // quadrature rounding shows in the 15th digit
        assert!(t
            .rows
            .iter()
            .all(|r| (r.re - 1.0).abs() < 1e-12 && r.im == 0.0 && r.flag == RowFlag::Ok));
        assert!((out.summary.sup_norm.value - 1.0).abs() < 1e-12);
    }
}
