//! Analysis reports: deterministic JSON plus plot-ready CSV.
//!
//! Determinism is a contract, not an accident: all maps are ordered
//! (`BTreeMap`), every float is rendered through the fixed 17-significant-
//! digit scientific form, and nothing time- or machine-dependent enters the
//! byte stream (runtimes go to stderr, not into the report). Two runs of
//! the same scenario produce byte-identical files.
//!
//! Reports are also self-contained for re-verification: the scenario
//! source is embedded verbatim, and every witness carries its vectors by
//! value in a parseable form, so `verify` can rebuild the operators and
//! recompute the residuals without the original file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::fmt_f64;
use crate::sequence::{Arithmetic, CoefficientSequence};
use crate::shift_rep::{SubspaceWitness, WitnessKind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub scenario: String,
    /// The contract rescale A ↦ A/(‖A‖+1) was applied to every operator.
    pub contracted: bool,
    /// Exact arithmetic was required rather than best-effort.
    pub exact_mode: bool,
    pub experiments: Vec<ExperimentRecord>,
    /// Verbatim scenario source — verification reruns start from here.
    pub scenario_source: String,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ExperimentRecord {
    /// 1-based position in the scenario's experiment list.
    pub index: usize,
    pub kind: String,
    pub label: String,
    pub verdict: String,
    /// Free-form evidence; numbers appear as full-precision strings.
    pub evidence: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<WitnessRecord>,
    pub tolerances: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<Table>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct WitnessRecord {
    pub kind: String,
    pub claim: String,
    pub operator: String,
    pub tol: String,
    pub residuals: Vec<String>,
    pub vectors: BTreeMap<String, VectorRecord>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct VectorRecord {
    pub arithmetic: String,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&join_csv(&self.columns));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&join_csv(row));
            out.push('\n');
        }
        out
    }
}

fn join_csv(cells: &[String]) -> String {
    cells
        .iter()
        .map(|c| {
            if c.contains(',') || c.contains('"') || c.contains('\n') {
                format!("\"{}\"", c.replace('"', "\"\""))
            } else {
                c.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// Evidence constructors — every number passes through the fixed format.
pub fn ev_f64(x: f64) -> Value {
    Value::String(fmt_f64(x))
}

pub fn ev_usize(n: usize) -> Value {
    Value::Number(serde_json::Number::from(n as u64))
}

pub fn ev_str(s: impl Into<String>) -> Value {
    Value::String(s.into())
}

pub fn ev_bool(b: bool) -> Value {
    Value::Bool(b)
}

pub fn ev_opt_usize(n: Option<usize>) -> Value {
    match n {
        Some(k) => ev_usize(k),
        None => Value::Null,
    }
}

pub fn witness_record(w: &SubspaceWitness) -> WitnessRecord {
    WitnessRecord {
        kind: w.kind.as_str().to_string(),
        claim: w.claim.clone(),
        operator: w.operator.clone(),
        tol: fmt_f64(w.tol),
        residuals: w.residuals.iter().map(|r| fmt_f64(*r)).collect(),
        vectors: w
            .vectors
            .iter()
            .map(|(name, seq)| {
                (
                    name.clone(),
                    VectorRecord {
                        arithmetic: seq.arithmetic().as_str().to_string(),
                        values: seq.display_values(),
                    },
                )
            })
            .collect(),
    }
}

pub fn witness_from_record(r: &WitnessRecord) -> Result<SubspaceWitness> {
    let kind = WitnessKind::parse(&r.kind)?;
    let tol: f64 = r
        .tol
        .parse()
        .map_err(|_| Error::Parse(format!("bad witness tolerance `{}`", r.tol)))?;
    let mut residuals = Vec::with_capacity(r.residuals.len());
    for s in &r.residuals {
        residuals.push(
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad witness residual `{s}`")))?,
        );
    }
    let mut vectors = BTreeMap::new();
    for (name, rec) in &r.vectors {
        let arithmetic = Arithmetic::parse(&rec.arithmetic)?;
        vectors.insert(
            name.clone(),
            CoefficientSequence::from_display(arithmetic, &rec.values)?,
        );
    }
    Ok(SubspaceWitness {
        kind,
        claim: r.claim.clone(),
        operator: r.operator.clone(),
        vectors,
        residuals,
        tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmitFormat {
    Json,
    Csv,
    All,
}

impl EmitFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(EmitFormat::Json),
            "csv" => Ok(EmitFormat::Csv),
            "all" => Ok(EmitFormat::All),
            other => Err(Error::Parse(format!(
                "unknown format `{other}` (use json, csv, or all)"
            ))),
        }
    }
}

impl AnalysisReport {
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut bytes =
            serde_json::to_vec_pretty(self).expect("report serialization is infallible");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(format!("report: {e}")))
    }

    /// Writes `<scenario>.json` and/or one `<scenario>.<index>.<table>.csv`
    /// per table, returning the paths. File content is deterministic.
    pub fn write(&self, dir: &Path, format: EmitFormat) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        if matches!(format, EmitFormat::Json | EmitFormat::All) {
            let path = dir.join(format!("{}.json", sanitize(&self.scenario)));
            fs::write(&path, self.to_json_bytes())?;
            written.push(path);
        }
        if matches!(format, EmitFormat::Csv | EmitFormat::All) {
            for exp in &self.experiments {
                for table in &exp.tables {
                    let path = dir.join(format!(
                        "{}.{:02}.{}.csv",
                        sanitize(&self.scenario),
                        exp.index,
                        sanitize(&table.name)
                    ));
                    fs::write(&path, table.to_csv())?;
                    written.push(path);
                }
            }
        }
        Ok(written)
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
