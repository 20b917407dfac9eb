//! Table and report files.
//!
//! CSV tables start with the line
//! `# toeplitz-spectra v<version> geometry=<g> lambda=<λ> symbol=<text>`
//! followed by `grid_point,re,im,flag` and one row per grid point. Line
//! endings are `\n`; numbers carry 15 significant digits.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use super::grid::{format_value, round_value};
use crate::error::{Error, Result};
use crate::spectra::GridFunction;
use crate::symbols::Geometry;
use crate::VERSION;

pub const TOOL: &str = "toeplitz-spectra";
pub const COLUMNS: &str = "grid_point,re,im,flag";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowFlag {
    Ok,
    /// The quadrature stopped before meeting its tolerance.
    Unconverged,
    /// No value could be computed; `re` and `im` are `nan`.
    Failed,
}

impl RowFlag {
    pub fn name(self) -> &'static str {
        match self {
            RowFlag::Ok => "ok",
            RowFlag::Unconverged => "unconverged",
            RowFlag::Failed => "failed",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(RowFlag::Ok),
            "unconverged" => Some(RowFlag::Unconverged),
            "failed" => Some(RowFlag::Failed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Row {
    pub grid_point: f64,
    pub re: f64,
    pub im: f64,
    pub flag: RowFlag,
}

impl Row {
    pub fn new(grid_point: f64, value: Complex64, flag: RowFlag) -> Self {
        Row {
            grid_point,
            re: value.re,
            im: value.im,
            flag,
        }
    }

    fn rounded(&self) -> Row {
        Row {
            grid_point: round_value(self.grid_point),
            re: round_value(self.re),
            im: round_value(self.im),
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableHeader {
    pub version: String,
    pub geometry: Geometry,
    pub lambda: f64,
    pub symbol: String,
}

impl TableHeader {
    pub fn new(geometry: Geometry, lambda: f64, symbol: impl Into<String>) -> Self {
        TableHeader {
            version: VERSION.to_string(),
            geometry,
            lambda,
            symbol: symbol.into(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "# {TOOL} v{} geometry={} lambda={} symbol={}",
            self.version,
            self.geometry,
            format_value(self.lambda),
            self.symbol
        )
    }

    fn parse(line: &str) -> Result<Self> {
        let bad = || Error::Config(format!("table header: cannot parse `{line}`"));
        let rest = line.strip_prefix(&format!("# {TOOL} v")).ok_or_else(bad)?;
        let (version, rest) = rest.split_once(" geometry=").ok_or_else(bad)?;
        let (geometry, rest) = rest.split_once(" lambda=").ok_or_else(bad)?;
        let (lambda, symbol) = rest.split_once(" symbol=").ok_or_else(bad)?;
        Ok(TableHeader {
            version: version.to_string(),
            geometry: geometry.parse().map_err(|_| bad())?,
            lambda: lambda.parse().map_err(|_| bad())?,
            symbol: symbol.to_string(),
        })
    }
}

pub fn render_csv(header: &TableHeader, rows: &[Row]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 2));
    out.push_str(&header.line());
    out.push('\n');
    out.push_str(COLUMNS);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_value(r.grid_point),
            format_value(r.re),
            format_value(r.im),
            r.flag.name()
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: TableHeader,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = TableHeader::parse(
            lines
                .next()
                .ok_or_else(|| Error::Config("table: empty file".into()))?,
        )?;
        match lines.next() {
            Some(COLUMNS) => {}
            other => {
                return Err(Error::Config(format!(
                    "table line 2: expected `{COLUMNS}`, got `{}`",
                    other.unwrap_or("")
                )))
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 3;
            let bad =
                |what: &str| Error::Config(format!("table line {line_no}: {what} in `{line}`"));
            let fields: Vec<&str> = line.split(',').collect();
            let [t, re, im, flag] = fields.as_slice() else {
                return Err(bad("expected 4 fields"));
            };
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
            rows.push(Row {
                grid_point: num(t)?,
                re: num(re)?,
                im: num(im)?,
                flag: RowFlag::parse(flag).ok_or_else(|| bad("unknown flag"))?,
            });
        }
        Ok(Table { header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read table {}: {e}", path.display())))?;
        Table::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Rows with a value, as a sampled function.
    pub fn grid_function(&self) -> GridFunction {
        let rows: Vec<&Row> = self
            .rows
            .iter()
            .filter(|r| r.flag != RowFlag::Failed)
            .collect();
        GridFunction {
            geometry: Some(self.header.geometry),
            points: rows.iter().map(|r| r.grid_point).collect(),
            values: rows.iter().map(|r| Complex64::new(r.re, r.im)).collect(),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, P: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
    #[serde(flatten)]
    payload: &'a P,
}

/// Pretty JSON with the tool version and the resolved config in front.
pub fn render_json<C: Serialize, P: Serialize>(
    command: &str,
    config: &C,
    payload: &P,
) -> Result<String> {
    let env = Envelope {
        tool: TOOL,
        version: VERSION,
        command,
        config,
        payload,
    };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
pub struct GammaPayload<'a> {
    pub geometry: Geometry,
    pub lambda: f64,
    pub symbol: &'a str,
    pub rows: Vec<Row>,
}

impl<'a> GammaPayload<'a> {
    pub fn new(header: &'a TableHeader, rows: &[Row]) -> Self {
        GammaPayload {
            geometry: header.geometry,
            lambda: header.lambda,
            symbol: &header.symbol,
            rows: rows.iter().map(Row::rounded).collect(),
        }
    }
}

/// Write `text` to `path`, or to stdout when there is no path.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> TableHeader {
        TableHeader::new(Geometry::Parabolic, 0.0, "delta:loc=1")
    }

    #[test]
    fn header_line_layout() {
        assert_eq!(
            header().line(),
            format!("# toeplitz-spectra v{VERSION} geometry=parabolic lambda=0 symbol=delta:loc=1")
        );
        let h = TableHeader::new(Geometry::Hyperbolic, 2.5, "sum(constant:1; indicator:0,1)");
        assert_eq!(TableHeader::parse(&h.line()).unwrap(), h);
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            Row::new(0.5, Complex64::new(0.36787944117144233, 0.0), RowFlag::Ok),
            Row::new(1.0, Complex64::new(f64::NAN, f64::NAN), RowFlag::Failed),
            Row::new(2.0, Complex64::new(-1e-20, 3.0), RowFlag::Unconverged),
        ];
        let text = render_csv(&header(), &rows);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert_eq!(text.lines().nth(2), Some("0.5,0.367879441171442,0,ok"));
        let t = Table::parse(&text).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[2].flag, RowFlag::Unconverged);
        let g = t.grid_function();
        assert_eq!(g.points, vec![0.5, 2.0]);
        assert_eq!(g.geometry, Some(Geometry::Parabolic));
    }

    #[test]
    fn malformed_tables() {
        assert!(Table::parse("").is_err());
        assert!(Table::parse("# other tool\n").is_err());
        let h = header().line();
        assert!(Table::parse(&format!("{h}\nx,y\n")).is_err());
        let e = Table::parse(&format!("{h}\n{COLUMNS}\n1,2,3\n"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 3"), "{e}");
        assert!(Table::parse(&format!("{h}\n{COLUMNS}\n1,2,3,maybe\n")).is_err());
    }

    #[test]
    fn json_envelope() {
        let cfg = serde_json::json!({"lambda": 0.0});
        let rows = [Row::new(1.0, Complex64::new(1.0 / 3.0, 0.0), RowFlag::Ok)];
        let h = header();
        let s = render_json("gamma", &cfg, &GammaPayload::new(&h, &rows)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["version"], VERSION);
        assert_eq!(v["config"]["lambda"], 0.0);
        assert_eq!(v["rows"][0]["re"], 0.333333333333333);
        assert_eq!(v["rows"][0]["flag"], "ok");
    }
}
