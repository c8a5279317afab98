//! Loading documents of every supported type and rendering curves as CSV.
//!
//! Loading happens in two steps so callers can tell a malformed document
//! (wrong shape, unreadable number) from a well-formed one that breaks an
//! invariant (decreasing jump locations, jumps that do not sum to one).

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::conditions::{RationalF, RationalFRepr};
use crate::cyclic::{CyclicRepr, CyclicSystem};
use crate::distributions::rational::to_f64;
use crate::distributions::{StepCdf, StepCdfRepr, TargetF, TargetFRepr};
use crate::montecarlo::{EmpiricalCdf, EmpiricalRepr, SystemRepr, SystemSpec};
use crate::Error;

#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Step(StepCdf),
    Target(TargetF),
    Rational(RationalF),
    Cyclic(CyclicSystem),
    Empirical(EmpiricalCdf),
    System(SystemSpec),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Step(_) => "step",
            Document::Target(_) => "target",
            Document::Rational(_) => "rational",
            Document::Cyclic(_) => "cyclic",
            Document::Empirical(_) => "empirical",
            Document::System(_) => "system",
        }
    }

    pub fn to_json(&self) -> String {
        let v = match self {
            Document::Step(x) => serde_json::to_value(x),
            Document::Target(x) => serde_json::to_value(x),
            Document::Rational(x) => serde_json::to_value(x),
            Document::Cyclic(x) => serde_json::to_value(x),
            Document::Empirical(x) => serde_json::to_value(x),
            Document::System(x) => serde_json::to_value(x),
        };
        serde_json::to_string_pretty(&v.expect("plain data")).expect("plain data")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LoadError {
    Io(String),
    /// The document does not have the expected shape.
    Schema(String),
    /// The document is well formed but describes an invalid value.
    Invariant(Error),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(m) => write!(f, "cannot read input: {m}"),
            LoadError::Schema(m) => write!(f, "malformed document: {m}"),
            LoadError::Invariant(e) => write!(f, "invalid value: {e}"),
        }
    }
}

impl std::error::Error for LoadError {}

fn load<R, T>(value: Value) -> Result<T, LoadError>
where
    R: DeserializeOwned,
    T: TryFrom<R, Error = Error>,
{
    let repr: R = serde_json::from_value(value).map_err(|e| LoadError::Schema(e.to_string()))?;
    T::try_from(repr).map_err(|e| match e {
        Error::Parse(m) => LoadError::Schema(m),
        e => LoadError::Invariant(e),
    })
}

/// Parses any supported document, telling the type apart by its keys.
pub fn parse_document(text: &str) -> Result<Document, LoadError> {
    let value: Value = serde_json::from_str(text).map_err(|e| LoadError::Schema(e.to_string()))?;
    let Some(obj) = value.as_object() else {
        return Err(LoadError::Schema("expected a JSON object".into()));
    };
    let has = |k: &str| obj.contains_key(k);
    if has("kind") {
        load::<SystemRepr, _>(value).map(Document::System)
    } else if has("jumps") {
        load::<StepCdfRepr, _>(value).map(Document::Step)
    } else if has("breakpoints") {
        load::<TargetFRepr, _>(value).map(Document::Target)
    } else if has("alpha") {
        load::<RationalFRepr, _>(value).map(Document::Rational)
    } else if has("taus") {
        load::<EmpiricalRepr, _>(value).map(Document::Empirical)
    } else if has("marked") {
        load::<CyclicRepr, _>(value).map(Document::Cyclic)
    } else {
        Err(LoadError::Schema(
            "unrecognised document: expected one of jumps, breakpoints, alpha, marked, taus, kind"
                .into(),
        ))
    }
}

pub fn read_document(path: &Path) -> Result<Document, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
    parse_document(&text)
}

/// Decimal rendering with 12 significant digits.
pub fn format_sig(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().expect("valid float");
    rounded.to_string()
}

/// `t,F` rows: the left limit and the value at every jump.
pub fn step_csv(f: &StepCdf) -> String {
    let mut out = String::from("t,F\n");
    let mut below = 0.0;
    for (i, (t, _)) in f.jumps().iter().enumerate() {
        let t = format_sig(to_f64(t));
        let after = to_f64(f.cumulative(i));
        out.push_str(&format!(
            "{t},{}\n{t},{}\n",
            format_sig(below),
            format_sig(after)
        ));
        below = after;
    }
    out
}

/// `t,F` rows at every breakpoint.
pub fn target_csv(f: &TargetF) -> String {
    let mut out = String::from("t,F\n");
    for (t, v) in f.breakpoints() {
        out.push_str(&format!(
            "{},{}\n",
            format_sig(to_f64(t)),
            format_sig(to_f64(v))
        ));
    }
    out
}
