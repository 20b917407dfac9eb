//! Symbols in the three invariant geometries.
//!
//! A symbol is a finite sum of function terms plus a finite sum of
//! δ-derivative terms at interior points. The symbol variable is the radius
//! `ρ ∈ (0,1)` (elliptic), the height `y ∈ (0,∞)` (parabolic) or the angle
//! `θ ∈ (0,π)` (hyperbolic).
//!
//! # Text form
//!
//! ```text
//! symbol := term | "sum(" [term (";" term)*] ")"
//! term   := [coef "*"] name [":" args]
//! args   := value ("," value)* | key "=" value ("," key "=" value)*
//! ```
//!
//! | name               | arguments                          | meaning                      |
//! |--------------------|------------------------------------|------------------------------|
//! | `constant`         | `c`                                | `c`                          |
//! | `indicator`        | `lo,hi` or `lo=,hi=[,coef=]`       | `1` on `[lo, hi)`            |
//! | `power`            | `exp=p[,coef=]`                    | `x^p`                        |
//! | `osc_radial`       | `beta=,alpha=[,coef=]`             | `(1-ρ²)^{-β} sin (1-ρ²)^{-α}` |
//! | `osc_angular`      | `beta=,alpha=[,coef=]`             | `θ^{-β} sin θ^{-α}`          |
//! | `delta`            | `loc=[,coef=]`                     | `c δ(x - loc)`               |
//! | `delta_derivative` | `order=,loc=[,coef=]`              | `c δ^{(m)}(x - loc)`         |
//!
//! `hi` may be `inf` in the parabolic geometry. Printing a symbol gives a
//! canonical text that parses back to the same symbol.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl Geometry {
    pub const ALL: [Geometry; 3] = [
        Geometry::Elliptic,
        Geometry::Parabolic,
        Geometry::Hyperbolic,
    ];

    /// Open domain of the symbol variable.
    pub fn domain(self) -> (f64, f64) {
        match self {
            Geometry::Elliptic => (0.0, 1.0),
            Geometry::Parabolic => (0.0, f64::INFINITY),
            Geometry::Hyperbolic => (0.0, PI),
        }
    }

    pub fn is_interior(self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x.is_finite() && x > lo && x < hi
    }

    pub fn name(self) -> &'static str {
        match self {
            Geometry::Elliptic => "elliptic",
            Geometry::Parabolic => "parabolic",
            Geometry::Hyperbolic => "hyperbolic",
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Geometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "elliptic" => Ok(Geometry::Elliptic),
            "parabolic" => Ok(Geometry::Parabolic),
            "hyperbolic" => Ok(Geometry::Hyperbolic),
            other => Err(Error::Config(format!("unknown geometry `{other}`"))),
        }
    }
}

pub const MAX_DELTA_ORDER: u32 = 4;

/// `coef · δ^{(order)}(x - loc)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaTerm {
    order: u32,
    loc: f64,
    coef: f64,
}

impl DeltaTerm {
    pub fn new(geometry: Geometry, order: u32, loc: f64, coef: f64) -> Result<Self> {
        if order > MAX_DELTA_ORDER {
            return Err(Error::param(format!(
                "δ-derivative order {order} exceeds the cap {MAX_DELTA_ORDER}"
            )));
        }
        if !geometry.is_interior(loc) {
            let (lo, hi) = geometry.domain();
            return Err(Error::param(format!(
                "δ location {loc} is not interior to the {geometry} domain ({lo}, {hi})"
            )));
        }
        if !coef.is_finite() {
            return Err(Error::param(format!("δ coefficient {coef} is not finite")));
        }
        Ok(DeltaTerm { order, loc, coef })
    }

    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn loc(&self) -> f64 {
        self.loc
    }
    pub fn coef(&self) -> f64 {
        self.coef
    }

    fn scaled(mut self, c: f64) -> Self {
        self.coef *= c;
        self
    }
}

pub type CustomFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum FunctionTerm {
    Constant {
        value: f64,
    },
    Indicator {
        lo: f64,
        hi: f64,
        coef: f64,
    },
    Power {
        exp: f64,
        coef: f64,
    },
    OscRadial {
        beta: f64,
        alpha: f64,
        coef: f64,
    },
    OscAngular {
        beta: f64,
        alpha: f64,
        coef: f64,
    },
    /// Arbitrary function with known kinks; not expressible in text.
    Custom {
        f: CustomFn,
        breakpoints: Vec<f64>,
        label: String,
    },
}

impl fmt::Debug for FunctionTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionTerm::Custom {
                breakpoints, label, ..
            } => f
                .debug_struct("Custom")
                .field("label", label)
                .field("breakpoints", breakpoints)
                .finish(),
            other => write!(f, "{other}"),
        }
    }
}

impl FunctionTerm {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            FunctionTerm::Constant { value } => value,
            FunctionTerm::Indicator { lo, hi, coef } => {
                if x >= lo && x < hi {
                    coef
                } else {
                    0.0
                }
            }
            FunctionTerm::Power { exp, coef } => coef * x.powf(exp),
            FunctionTerm::OscRadial { beta, alpha, coef } => {
                let u = (1.0 - x) * (1.0 + x);
                coef * u.powf(-beta) * u.powf(-alpha).sin()
            }
            FunctionTerm::OscAngular { beta, alpha, coef } => {
                coef * x.powf(-beta) * x.powf(-alpha).sin()
            }
            FunctionTerm::Custom { ref f, .. } => f(x),
        }
    }

    /// Interior points where the term is not smooth.
    pub fn breakpoints(&self, geometry: Geometry) -> Vec<f64> {
        let pts = match self {
            FunctionTerm::Indicator { lo, hi, .. } => vec![*lo, *hi],
            FunctionTerm::Custom { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        };
        pts.into_iter()
            .filter(|&p| geometry.is_interior(p))
            .collect()
    }

    fn scaled(&self, c: f64) -> Self {
        match self.clone() {
            FunctionTerm::Constant { value } => FunctionTerm::Constant { value: value * c },
            FunctionTerm::Indicator { lo, hi, coef } => FunctionTerm::Indicator {
                lo,
                hi,
                coef: coef * c,
            },
            FunctionTerm::Power { exp, coef } => FunctionTerm::Power {
                exp,
                coef: coef * c,
            },
            FunctionTerm::OscRadial { beta, alpha, coef } => FunctionTerm::OscRadial {
                beta,
                alpha,
                coef: coef * c,
            },
            FunctionTerm::OscAngular { beta, alpha, coef } => FunctionTerm::OscAngular {
                beta,
                alpha,
                coef: coef * c,
            },
            FunctionTerm::Custom {
                f,
                breakpoints,
                label,
            } => FunctionTerm::Custom {
                f: Arc::new(move |x| c * f(x)),
                breakpoints,
                label: format!("{c}*{label}"),
            },
        }
    }
}

fn coef_prefix(f: &mut fmt::Formatter<'_>, coef: f64) -> fmt::Result {
    if coef != 1.0 {
        write!(f, "{coef}*")?;
    }
    Ok(())
}

impl fmt::Display for FunctionTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionTerm::Constant { value } => write!(f, "constant:{value}"),
            FunctionTerm::Indicator { lo, hi, coef } => {
                coef_prefix(f, *coef)?;
                write!(f, "indicator:{lo},{hi}")
            }
            FunctionTerm::Power { exp, coef } => {
                coef_prefix(f, *coef)?;
                write!(f, "power:exp={exp}")
            }
            FunctionTerm::OscRadial { beta, alpha, coef } => {
                coef_prefix(f, *coef)?;
                write!(f, "osc_radial:beta={beta},alpha={alpha}")
            }
            FunctionTerm::OscAngular { beta, alpha, coef } => {
                coef_prefix(f, *coef)?;
                write!(f, "osc_angular:beta={beta},alpha={alpha}")
            }
            FunctionTerm::Custom { label, .. } => write!(f, "custom:{label}"),
        }
    }
}

impl fmt::Display for DeltaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 0 {
            write!(f, "delta:loc={}", self.loc)?;
            if self.coef != 1.0 {
                write!(f, ",coef={}", self.coef)?;
            }
            Ok(())
        } else {
            write!(
                f,
                "delta_derivative:order={},loc={},coef={}",
                self.order, self.loc, self.coef
            )
        }
    }
}

/// A symbol: function part plus δ-derivative part.
#[derive(Debug, Clone)]
pub struct SymbolSpec {
    geometry: Geometry,
    terms: Vec<FunctionTerm>,
    deltas: Vec<DeltaTerm>,
    label: String,
}

enum Component {
    Function(FunctionTerm),
    Delta(DeltaTerm),
}

impl SymbolSpec {
    pub fn new(
        geometry: Geometry,
        terms: Vec<FunctionTerm>,
        deltas: Vec<DeltaTerm>,
    ) -> Result<Self> {
        for t in &terms {
            validate_term(geometry, t)?;
        }
        for d in &deltas {
            if !geometry.is_interior(d.loc) {
                return Err(Error::param(format!(
                    "δ location {} outside the {geometry} domain",
                    d.loc
                )));
            }
        }
        for (i, a) in deltas.iter().enumerate() {
            if deltas[..i].iter().any(|b| b.loc == a.loc) {
                return Err(Error::param(format!(
                    "two δ terms share the location {}",
                    a.loc
                )));
            }
        }
        let mut s = SymbolSpec {
            geometry,
            terms,
            deltas,
            label: String::new(),
        };
        s.label = s.canonical_text();
        Ok(s)
    }

    pub fn constant(geometry: Geometry, value: f64) -> Result<Self> {
        Self::new(geometry, vec![FunctionTerm::Constant { value }], vec![])
    }

    pub fn indicator(geometry: Geometry, lo: f64, hi: f64) -> Result<Self> {
        Self::new(
            geometry,
            vec![FunctionTerm::Indicator { lo, hi, coef: 1.0 }],
            vec![],
        )
    }

    pub fn delta(geometry: Geometry, loc: f64) -> Result<Self> {
        Self::new(
            geometry,
            vec![],
            vec![DeltaTerm::new(geometry, 0, loc, 1.0)?],
        )
    }

    pub fn custom(
        geometry: Geometry,
        label: &str,
        breakpoints: Vec<f64>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(
            geometry,
            vec![FunctionTerm::Custom {
                f: Arc::new(f),
                breakpoints,
                label: label.to_owned(),
            }],
            vec![],
        )
    }

    /// Named built-in symbol with parameters, e.g. `("osc_angular", {beta, alpha})`.
    pub fn builtin(geometry: Geometry, name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let (terms, deltas) = match build_component(geometry, name, params, None)? {
            Component::Function(t) => (vec![t], vec![]),
            Component::Delta(d) => (vec![], vec![d]),
        };
        Self::new(geometry, terms, deltas)
    }

    pub fn parse(geometry: Geometry, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut deltas = Vec::new();
        parse_into(geometry, text.trim(), &mut terms, &mut deltas)?;
        Self::new(geometry, terms, deltas)
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }
    pub fn terms(&self) -> &[FunctionTerm] {
        &self.terms
    }
    pub fn deltas(&self) -> &[DeltaTerm] {
        &self.deltas
    }
    pub fn label(&self) -> &str {
        &self.label
    }

    /// `c · self`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.geometry,
            self.terms.iter().map(|t| t.scaled(c)).collect(),
            self.deltas.iter().map(|d| d.scaled(c)).collect(),
        )
    }

    /// `self + other`.
    pub fn plus(&self, other: &SymbolSpec) -> Result<Self> {
        if other.geometry != self.geometry {
            return Err(Error::GeometryMismatch {
                expected: self.geometry,
                found: other.geometry,
            });
        }
        let mut deltas = self.deltas.clone();
        for d in &other.deltas {
            match deltas
                .iter_mut()
                .find(|e| e.loc == d.loc && e.order == d.order)
            {
                Some(e) => e.coef += d.coef,
                None => deltas.push(*d),
            }
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(self.geometry, terms, deltas)
    }

    /// Value of the function part at an interior point; δ terms are ignored.
    pub fn eval_function_part(&self, x: f64) -> Result<f64> {
        if !self.geometry.is_interior(x) {
            let (lo, hi) = self.geometry.domain();
            return Err(Error::domain(format!(
                "{x} is not interior to the {} domain ({lo}, {hi})",
                self.geometry
            )));
        }
        let value: f64 = self.terms.iter().map(|t| t.eval(x)).sum();
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite { at: x, value })
        }
    }

    /// Interior breakpoints of the function part, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .terms
            .iter()
            .flat_map(|t| t.breakpoints(self.geometry))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn is_text_representable(&self) -> bool {
        !self
            .terms
            .iter()
            .any(|t| matches!(t, FunctionTerm::Custom { .. }))
    }

    fn canonical_text(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(ToString::to_string)
            .chain(self.deltas.iter().map(ToString::to_string))
            .collect();
        if parts.len() == 1 {
            parts.into_iter().next().unwrap()
        } else {
            format!("sum({})", parts.join("; "))
        }
    }
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn validate_term(geometry: Geometry, term: &FunctionTerm) -> Result<()> {
    let finite = |name: &str, v: f64| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(Error::param(format!("{name} = {v} is not finite")))
        }
    };
    match *term {
        FunctionTerm::Constant { value } => finite("constant", value),
        FunctionTerm::Indicator { lo, hi, coef } => {
            finite("coef", coef)?;
            let (dlo, dhi) = geometry.domain();
            if !(lo.is_finite() && lo >= dlo && hi > lo && hi <= dhi) {
                return Err(Error::param(format!(
                    "indicator bounds [{lo}, {hi}) must satisfy {dlo} ≤ lo < hi ≤ {dhi}"
                )));
            }
            Ok(())
        }
        FunctionTerm::Power { exp, coef } => {
            finite("coef", coef)?;
            finite("exp", exp)
        }
        FunctionTerm::OscRadial { beta, alpha, coef } => {
            if geometry != Geometry::Elliptic {
                return Err(Error::GeometryMismatch {
                    expected: Geometry::Elliptic,
                    found: geometry,
                });
            }
            finite("coef", coef)?;
            if !(beta > 0.0 && beta < alpha && alpha.is_finite()) {
                return Err(Error::param(format!(
                    "osc_radial requires 0 < β < α, got β = {beta}, α = {alpha}"
                )));
            }
            Ok(())
        }
        FunctionTerm::OscAngular { beta, alpha, coef } => {
            if geometry != Geometry::Hyperbolic {
                return Err(Error::GeometryMismatch {
                    expected: Geometry::Hyperbolic,
                    found: geometry,
                });
            }
            finite("coef", coef)?;
            if !(beta > 0.0 && beta < 1.0 && alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::param(format!(
                    "osc_angular requires 0 < β < 1 and α > 0, got β = {beta}, α = {alpha}"
                )));
            }
            Ok(())
        }
        FunctionTerm::Custom {
            ref breakpoints, ..
        } => {
            if breakpoints.iter().any(|p| !p.is_finite()) {
                return Err(Error::param("custom breakpoints must be finite"));
            }
            Ok(())
        }
    }
}

const NAMES: [&str; 7] = [
    "constant",
    "indicator",
    "power",
    "osc_radial",
    "osc_angular",
    "delta",
    "delta_derivative",
];

fn build_component(
    geometry: Geometry,
    name: &str,
    params: &BTreeMap<String, f64>,
    positional: Option<&[f64]>,
) -> Result<Component> {
    if !NAMES.contains(&name) {
        return Err(Error::UnknownSymbol(name.to_owned()));
    }
    let allowed: &[&str] = match name {
        "constant" => &["value", "coef"],
        "indicator" => &["lo", "hi", "coef"],
        "power" => &["exp", "coef"],
        "osc_radial" | "osc_angular" => &["beta", "alpha", "coef"],
        "delta" => &["loc", "coef"],
        _ => &["order", "loc", "coef"],
    };
    let mut params = params.clone();
    for alias in ["x0", "y0", "rho0", "theta0"] {
        if let Some(v) = params.remove(alias) {
            params.insert("loc".into(), v);
        }
    }
    if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Parse(format!(
            "`{name}` does not take the parameter `{bad}`"
        )));
    }
    let get = |key: &str| -> Result<f64> {
        params
            .get(key)
            .copied()
            .ok_or_else(|| Error::Parse(format!("`{name}` needs `{key}=`")))
    };
    let coef = params.get("coef").copied().unwrap_or(1.0);
    let pos = positional.unwrap_or(&[]);
    let arity = |n: usize| -> Result<()> {
        if pos.len() == n || pos.is_empty() {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "`{name}` takes {n} positional values, got {}",
                pos.len()
            )))
        }
    };
    let term = match name {
        "constant" => {
            arity(1)?;
            let value = match pos.first() {
                Some(&v) => v,
                None => params.get("value").copied().unwrap_or(1.0),
            };
            FunctionTerm::Constant {
                value: value * coef,
            }
        }
        "indicator" => {
            arity(2)?;
            let (lo, hi) = if pos.len() == 2 {
                (pos[0], pos[1])
            } else {
                (get("lo")?, get("hi")?)
            };
            FunctionTerm::Indicator { lo, hi, coef }
        }
        "power" => {
            arity(1)?;
            let exp = match pos.first() {
                Some(&v) => v,
                None => get("exp")?,
            };
            FunctionTerm::Power { exp, coef }
        }
        "osc_radial" | "osc_angular" => {
            arity(2)?;
            let (beta, alpha) = if pos.len() == 2 {
                (pos[0], pos[1])
            } else {
                (get("beta")?, get("alpha")?)
            };
            if name == "osc_radial" {
                FunctionTerm::OscRadial { beta, alpha, coef }
            } else {
                FunctionTerm::OscAngular { beta, alpha, coef }
            }
        }
        _ => {
            let (order, loc) = if name == "delta" {
                arity(1)?;
                (0.0, pos.first().copied().map_or_else(|| get("loc"), Ok)?)
            } else {
                arity(2)?;
                if pos.len() == 2 {
                    (pos[0], pos[1])
                } else {
                    (get("order")?, get("loc")?)
                }
            };
            if !(order >= 0.0 && order.fract() == 0.0) {
                return Err(Error::param(format!(
                    "δ order must be a nonnegative integer, got {order}"
                )));
            }
            return Ok(Component::Delta(DeltaTerm::new(
                geometry,
                order as u32,
                loc,
                coef,
            )?));
        }
    };
    validate_term(geometry, &term)?;
    Ok(Component::Function(term))
}

fn parse_number(s: &str) -> Result<f64> {
    let t = s.trim();
    t.parse::<f64>()
        .map_err(|_| Error::Parse(format!("`{t}` is not a number")))
}

/// Split on `sep` at parenthesis depth zero.
fn split_top(s: &str, sep: char) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Parse(format!("unbalanced `)` in `{s}`")));
                }
            }
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced `(` in `{s}`")));
    }
    out.push(&s[start..]);
    Ok(out)
}

fn parse_into(
    geometry: Geometry,
    text: &str,
    terms: &mut Vec<FunctionTerm>,
    deltas: &mut Vec<DeltaTerm>,
) -> Result<()> {
    if text.is_empty() {
        return Err(Error::Parse("empty symbol".into()));
    }
    if let Some(inner) = text.strip_prefix("sum(") {
        let inner = inner
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("`{text}`: missing closing `)`")))?;
        if inner.trim().is_empty() {
            return Ok(());
        }
        for part in split_top(inner, ';')? {
            parse_into(geometry, part.trim(), terms, deltas)?;
        }
        return Ok(());
    }
    let (coef, body) = match text.split_once('*') {
        Some((c, rest)) => (parse_number(c)?, rest.trim()),
        None => (1.0, text),
    };
    let (name, args) = match body.split_once(':') {
        Some((n, a)) => (n.trim(), a.trim()),
        None => (body.trim(), ""),
    };
    let mut params = BTreeMap::new();
    let mut positional = Vec::new();
    if !args.is_empty() {
        for item in args.split(',') {
            match item.split_once('=') {
                Some((k, v)) => {
                    if params
                        .insert(k.trim().to_owned(), parse_number(v)?)
                        .is_some()
                    {
                        return Err(Error::Parse(format!("duplicate parameter `{}`", k.trim())));
                    }
                }
                None => positional.push(parse_number(item)?),
            }
        }
    }
    if !params.is_empty() && !positional.is_empty() {
        return Err(Error::Parse(format!(
            "`{body}` mixes positional and named arguments"
        )));
    }
    if coef != 1.0 {
        *params.entry("coef".to_owned()).or_insert(1.0) *= coef;
    }
    let pos = if positional.is_empty() {
        None
    } else {
        Some(positional.as_slice())
    };
    match build_component(geometry, name, &params, pos)? {
        Component::Function(t) => terms.push(t),
        Component::Delta(d) => deltas.push(d),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn constant_symbol() {
        let s = SymbolSpec::builtin(Geometry::Elliptic, "constant", &p(&[("value", 1.0)])).unwrap();
        for x in [0.01, 0.5, 0.99] {
            assert_eq!(s.eval_function_part(x).unwrap(), 1.0);
        }
        let s = SymbolSpec::parse(Geometry::Hyperbolic, "constant:3").unwrap();
        assert_eq!(s.eval_function_part(2.0).unwrap(), 3.0);
    }

    #[test]
    fn delta_symbol() {
        let s = SymbolSpec::builtin(Geometry::Parabolic, "delta", &p(&[("y0", 1.0)])).unwrap();
        assert!(s.terms().is_empty());
        assert_eq!(
            s.deltas(),
            &[DeltaTerm {
                order: 0,
                loc: 1.0,
                coef: 1.0
            }]
        );
        assert_eq!(s.eval_function_part(1.0).unwrap(), 0.0);
    }

    #[test]
    fn oscillating_symbols() {
        let s = SymbolSpec::builtin(
            Geometry::Hyperbolic,
            "osc_angular",
            &p(&[("beta", 0.5), ("alpha", 1.0)]),
        )
        .unwrap();
        let th: f64 = 0.3;
        assert_eq!(
            s.eval_function_part(th).unwrap(),
            th.powf(-0.5) * (1.0 / th).sin()
        );
        let s = SymbolSpec::parse(Geometry::Elliptic, "osc_radial:beta=0.25,alpha=0.5").unwrap();
        let v = s.eval_function_part(0.6).unwrap();
        let expect = 0.64f64.powf(-0.25) * 0.64f64.powf(-0.5).sin();
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn indicator_values() {
        let s = SymbolSpec::parse(Geometry::Elliptic, "indicator:0,0.5").unwrap();
        assert_eq!(s.eval_function_part(0.25).unwrap(), 1.0);
        assert_eq!(s.eval_function_part(0.75).unwrap(), 0.0);
        assert_eq!(s.breakpoints(), vec![0.5]);
        let s = SymbolSpec::parse(Geometry::Parabolic, "indicator:lo=1,hi=inf,coef=2").unwrap();
        assert_eq!(s.eval_function_part(100.0).unwrap(), 2.0);
    }

    #[test]
    fn parameter_constraints() {
        assert!(SymbolSpec::parse(Geometry::Elliptic, "osc_radial:beta=0.5,alpha=0.25").is_err());
        assert!(SymbolSpec::parse(Geometry::Hyperbolic, "osc_angular:beta=1,alpha=1").is_err());
        assert!(matches!(
            SymbolSpec::parse(Geometry::Parabolic, "osc_angular:beta=0.5,alpha=1"),
            Err(Error::GeometryMismatch { .. })
        ));
        assert!(matches!(
            SymbolSpec::parse(Geometry::Elliptic, "wiggle:1"),
            Err(Error::UnknownSymbol(_))
        ));
        assert!(SymbolSpec::parse(Geometry::Elliptic, "indicator:0,2").is_err());
        assert!(SymbolSpec::parse(Geometry::Elliptic, "indicator:0.5,0.5").is_err());
        assert!(SymbolSpec::parse(Geometry::Elliptic, "power:beta=1").is_err());
        assert!(SymbolSpec::parse(Geometry::Parabolic, "sum(delta:loc=1; delta:loc=1)").is_err());
        assert!(SymbolSpec::parse(Geometry::Parabolic, "sum(constant:1").is_err());
    }

    #[test]
    fn delta_constraints() {
        assert!(DeltaTerm::new(Geometry::Elliptic, 0, 1.0, 1.0).is_err());
        assert!(DeltaTerm::new(Geometry::Hyperbolic, 0, 0.0, 1.0).is_err());
        assert!(DeltaTerm::new(Geometry::Parabolic, 5, 1.0, 1.0).is_err());
        assert!(DeltaTerm::new(Geometry::Parabolic, 4, 1.0, 1.0).is_ok());
    }

    #[test]
    fn eval_errors() {
        let s = SymbolSpec::parse(Geometry::Elliptic, "constant:1").unwrap();
        assert!(matches!(s.eval_function_part(1.0), Err(Error::Domain(_))));
        assert!(matches!(s.eval_function_part(-0.1), Err(Error::Domain(_))));
        let s = SymbolSpec::custom(Geometry::Elliptic, "bad", vec![], |_| f64::NAN).unwrap();
        assert!(matches!(
            s.eval_function_part(0.5),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn sum_and_prefix_parsing() {
        let s = SymbolSpec::parse(
            Geometry::Parabolic,
            "sum(2*constant:1; -0.5*indicator:0,1; delta_derivative:order=1,loc=1,coef=2)",
        )
        .unwrap();
        assert_eq!(s.eval_function_part(0.5).unwrap(), 1.5);
        assert_eq!(s.deltas()[0].order(), 1);
        assert_eq!(s.deltas()[0].coef(), 2.0);
        assert_eq!(
            s.label(),
            "sum(constant:2; -0.5*indicator:0,1; delta_derivative:order=1,loc=1,coef=2)"
        );
    }

    fn arb_term(geometry: Geometry) -> impl Strategy<Value = String> {
        let (lo, hi) = match geometry {
            Geometry::Elliptic => (0.0, 1.0),
            Geometry::Parabolic => (0.0, 10.0),
            Geometry::Hyperbolic => (0.0, PI),
        };
        let coef = -5.0..5.0f64;
        let base = prop_oneof![
            coef.clone().prop_map(|c| format!("constant:{c}")),
            (coef.clone(), lo..hi, lo..hi).prop_filter_map("ordered", move |(c, a, b)| {
                (a < b).then(|| format!("{c}*indicator:{a},{b}"))
            }),
            (coef.clone(), 0.0..4.0f64).prop_map(|(c, e)| format!("{c}*power:exp={e}")),
        ];
        match geometry {
            Geometry::Elliptic => prop_oneof![
                base,
                (coef, 0.01..0.5f64, 0.5..2.0f64)
                    .prop_map(|(c, b, a)| format!("{c}*osc_radial:beta={b},alpha={a}"))
            ]
            .boxed(),
            Geometry::Hyperbolic => prop_oneof![
                base,
                (coef, 0.01..0.99f64, 0.1..2.0f64)
                    .prop_map(|(c, b, a)| format!("{c}*osc_angular:beta={b},alpha={a}"))
            ]
            .boxed(),
            Geometry::Parabolic => base.boxed(),
        }
    }

    fn arb_symbol() -> impl Strategy<Value = (Geometry, String)> {
        prop_oneof![
            Just(Geometry::Elliptic),
            Just(Geometry::Parabolic),
            Just(Geometry::Hyperbolic)
        ]
        .prop_flat_map(|g| {
            (Just(g), prop::collection::vec(arb_term(g), 1..4))
                .prop_map(|(g, ts)| (g, format!("sum({})", ts.join(";"))))
        })
    }

    proptest! {
        #[test]
        fn text_round_trip_is_evaluation_identical((geometry, text) in arb_symbol()) {
            let s = SymbolSpec::parse(geometry, &text).unwrap();
            let again = SymbolSpec::parse(geometry, s.label()).unwrap();
            prop_assert_eq!(s.label(), again.label());
            let (lo, hi) = match geometry {
                Geometry::Parabolic => (0.0, 20.0),
                g => g.domain(),
            };
            for i in 1..=1000 {
                let x = lo + (hi - lo) * i as f64 / 1001.0;
                let a = s.eval_function_part(x).unwrap();
                let b = again.eval_function_part(x).unwrap();
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn delta_locations_validated(loc in -2.0..5.0f64, order in 0u32..7) {
            let r = DeltaTerm::new(Geometry::Hyperbolic, order, loc, 1.0);
            prop_assert_eq!(r.is_ok(), loc > 0.0 && loc < PI && order <= MAX_DELTA_ORDER);
        }
    }
}
