//! Report rows and their CSV/JSON encodings.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Version of the CSV/JSON row schema.
pub const SCHEMA_VERSION: u32 = 1;

/// One sphere-averaged distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub system: String,
    pub kind: String,
    pub n: usize,
    pub metric: String,
    pub target: String,
    pub mean: f64,
    pub stderr: f64,
    pub n_theta: usize,
    pub inner_budget: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub kind: String,
    pub n: usize,
    pub target: String,
    pub applicable: bool,
    pub main: Option<f64>,
    pub main_stderr: Option<f64>,
    pub error_scale: Option<f64>,
    pub slack: Option<f64>,
    /// Measured E_θ ω² against the prediction's target, when available.
    pub measured: Option<f64>,
    pub measured_stderr: Option<f64>,
    pub agrees: Option<bool>,
    pub required_slack: Option<f64>,
    pub note: Option<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub kind: String,
    pub n: usize,
    pub value: f64,
    pub stderr: f64,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub name: String,
    pub n: Option<usize>,
    pub target: Option<String>,
    pub lhs: f64,
    pub rhs: Option<f64>,
    /// None for per-n rows of audits whose constants are unnamed.
    pub satisfied: Option<bool>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub version: String,
    pub schema_version: u32,
    /// Seconds since the Unix epoch; only set on request so that reports
    /// stay byte-identical by default.
    pub generated_unix: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<DistanceRow>,
    pub predictions: Vec<PredictionRow>,
    pub bounds: Vec<BoundRow>,
    pub audits: Vec<AuditRow>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn new(seed: u64) -> Self {
        Self {
            rows: Vec::new(),
            predictions: Vec::new(),
            bounds: Vec::new(),
            audits: Vec::new(),
            provenance: Provenance {
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                schema_version: SCHEMA_VERSION,
                generated_unix: None,
            },
        }
    }

    /// Writes the distance rows as CSV with a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv_rows(out, &self.rows)
    }

    /// Writes the distance rows to `path`, and the prediction, bound and
    /// audit rows, when present, to `<stem>.predictions.csv`,
    /// `<stem>.bounds.csv` and `<stem>.audits.csv` beside it. Returns every
    /// path written.
    pub fn write_csv_files(&self, path: &Path) -> Result<Vec<PathBuf>> {
        let mut written = vec![path.to_path_buf()];
        write_csv_file(path, &self.rows)?;
        if !self.predictions.is_empty() {
            written.push(write_csv_file(&sibling(path, "predictions"), &self.predictions)?);
        }
        if !self.bounds.is_empty() {
            let flat: Vec<FlatBoundRow> = self.bounds.iter().map(FlatBoundRow::from).collect();
            written.push(write_csv_file(&sibling(path, "bounds"), &flat)?);
        }
        if !self.audits.is_empty() {
            written.push(write_csv_file(&sibling(path, "audits"), &self.audits)?);
        }
        Ok(written)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Whether every audit with a verdict is satisfied.
    pub fn audits_pass(&self) -> bool {
        self.audits.iter().all(|a| a.satisfied != Some(false))
    }
}

/// A bound row with its parameters joined as `name=value;...` for CSV.
#[derive(Serialize)]
struct FlatBoundRow<'a> {
    kind: &'a str,
    n: usize,
    value: f64,
    stderr: f64,
    params: String,
    seed: u64,
}

impl<'a> From<&'a BoundRow> for FlatBoundRow<'a> {
    fn from(b: &'a BoundRow) -> Self {
        let params = b.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
        Self { kind: &b.kind, n: b.n, value: b.value, stderr: b.stderr, params, seed: b.seed }
    }
}

fn sibling(path: &Path, part: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{part}.csv"))
}

fn write_csv_file<T: Serialize>(path: &Path, rows: &[T]) -> Result<PathBuf> {
    let mut buf = Vec::new();
    write_csv_rows(&mut buf, rows)?;
    std::fs::write(path, buf)
        .map_err(|e| crate::error::HarnessError::Io { path: path.display().to_string(), source: e })?;
    Ok(path.to_path_buf())
}

/// Writes serializable rows as CSV with a header line.
pub fn write_csv_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| crate::error::HarnessError::Io { path: "<csv>".into(), source: e })?;
    Ok(())
}
