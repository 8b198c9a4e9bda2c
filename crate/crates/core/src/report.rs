//! CSV rows and JSON envelopes written by experiment runs.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::bounds::Bound;
use crate::montecarlo::TailCell;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Which inequality produced the `bound` column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `2 exp(−nt²/(κ² D))` with the explicit constant `D(κ, λ)`.
    ExplicitD,
    /// `2 exp(−nt²/(32(κ+𝔠)²))`.
    CocycleC,
    /// `2 exp(−nt²/(32‖φ‖²))` for Markov additive functionals.
    MarkovAzuma,
    /// Matrix products, fixed starting vector.
    MatrixVector,
    /// Matrix products, operator norm.
    MatrixNorm,
    /// Tail bound built from a corollary constant pack.
    CorollaryPack,
    /// Lower bounds on the probability that two walks generate a free group.
    FreenessCombiner,
    FreenessExponential,
    /// Lower bound on the drift.
    DriftLower,
    /// Frostman-type decay `K e^{−sm}` of cylinder measures.
    Frostman,
    /// Spectral-norm values (exact, upper bound or lower estimate).
    Spectral,
    /// A constant from the explicit formulas.
    Constant,
    /// No comparison; the row carries an estimate only.
    Estimate,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string tag"))
    }
}

/// One CSV row. Absent numbers are written as empty cells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub experiment: String,
    pub n: Option<usize>,
    pub t: Option<f64>,
    pub empirical: Option<f64>,
    pub wilson_radius: Option<f64>,
    /// Kept as text so that `inf` survives.
    pub bound: String,
    pub bound_kind: BoundKind,
    pub vacuous: bool,
    pub assumptions: String,
}

pub fn format_value(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".into()
    } else {
        format!("{v}")
    }
}

impl ReportRow {
    pub fn new(experiment: &str, kind: BoundKind) -> Self {
        ReportRow {
            experiment: experiment.into(),
            n: None,
            t: None,
            empirical: None,
            wilson_radius: None,
            bound: String::new(),
            bound_kind: kind,
            vacuous: false,
            assumptions: String::new(),
        }
    }

    /// A tail cell compared against a probability bound.
    pub fn tail(experiment: &str, cell: &TailCell, bound: &Bound, kind: BoundKind) -> Self {
        let mut notes = bound.assumptions.clone();
        if !bound.in_range {
            notes.insert(0, "outside proved range".into());
        }
        ReportRow {
            experiment: experiment.into(),
            n: Some(cell.n),
            t: Some(cell.t),
            empirical: Some(cell.frequency),
            wilson_radius: Some(cell.wilson_radius),
            bound: format_value(bound.value),
            bound_kind: kind,
            vacuous: bound.vacuous,
            assumptions: notes.join("; "),
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_empirical(mut self, value: f64, radius: f64) -> Self {
        self.empirical = Some(value);
        self.wilson_radius = Some(radius);
        self
    }

    pub fn with_bound(mut self, value: f64, vacuous: bool) -> Self {
        self.bound = format_value(value);
        self.vacuous = vacuous;
        self
    }

    pub fn with_note(mut self, note: impl AsRef<str>) -> Self {
        if !self.assumptions.is_empty() {
            self.assumptions.push_str("; ");
        }
        self.assumptions.push_str(note.as_ref());
        self
    }
}

/// Serializes rows with the fixed header.
pub fn csv_bytes(rows: &[ReportRow]) -> Result<Vec<u8>, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record([
            "experiment",
            "n",
            "t",
            "empirical",
            "wilson_radius",
            "bound",
            "bound_kind",
            "vacuous",
            "assumptions",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| ReportError::Io { path: "<memory>".into(), source: e.into_error() })
}

/// A hard invariant checked during a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl InvariantCheck {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        InvariantCheck { name: name.into(), passed, detail: detail.into() }
    }
}

/// Metadata written next to the CSV.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub invariants: Vec<InvariantCheck>,
    pub summary: serde_json::Value,
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ReportError> {
    fs::write(path, bytes).map_err(|source| ReportError::Io { path: path.display().to_string(), source })
}

pub fn write_json(path: &Path, envelope: &Envelope) -> Result<(), ReportError> {
    let mut bytes = serde_json::to_vec_pretty(envelope)?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}
