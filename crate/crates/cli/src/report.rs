use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{OutputFormat, RunConfig, SCHEMA_VERSION};
use crate::CliError;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Provenance {
    pub task: String,
    pub point: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    Failed,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Record {
    pub provenance: Provenance,
    pub inputs: Value,
    pub outputs: Value,
    pub status: PointStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Record {
    pub fn ok(provenance: Provenance, inputs: Value, outputs: Value) -> Self {
        Self { provenance, inputs, outputs, status: PointStatus::Ok, error: None }
    }

    pub fn failed(provenance: Provenance, inputs: Value, error: String) -> Self {
        Self { provenance, inputs, outputs: Value::Null, status: PointStatus::Failed, error: Some(error) }
    }
}

/// A flat table written as one CSV file. Column order is part of the schema.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// The numeric content of a run; identical across reruns at fixed seed and
/// thread count.
#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct Payload {
    pub records: Vec<Record>,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub task: String,
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    pub a_star: Option<f64>,
    pub payload_sha256: String,
    #[serde(flatten)]
    pub payload: Payload,
}

impl Report {
    pub fn new(config: &RunConfig, threads: usize, a_star: Option<f64>, payload: Payload) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            task: config.task().kind().as_str().into(),
            config_hash: config_hash(config),
            seed: config.seed,
            threads,
            a_star,
            payload_sha256: payload_hash(&payload),
            payload,
        }
    }

    pub fn all_points_ok(&self) -> bool {
        self.payload.records.iter().all(|r| r.status == PointStatus::Ok)
    }

    pub fn all_verdicts_pass(&self) -> bool {
        self.payload.verdicts.iter().all(|v| v.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.payload.tables.iter().find(|t| t.name == name)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.payload.verdicts.iter().find(|v| v.name == name)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of the configuration as canonical JSON, without the output
/// block. `serde_json` maps keep keys sorted, so source key order does not
/// matter.
pub fn config_hash(config: &RunConfig) -> String {
    let mut value = serde_json::to_value(config).expect("config serializes");
    if let Value::Object(m) = &mut value {
        m.remove("output");
    }
    sha256_hex(&serde_json::to_vec(&value).expect("value serializes"))
}

pub fn payload_hash(payload: &Payload) -> String {
    let value = serde_json::to_value(payload).expect("payload serializes");
    sha256_hex(&serde_json::to_vec(&value).expect("value serializes"))
}

/// Write the report under `dir` and return the files written.
pub fn emit_report(report: &Report, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>, CliError> {
    let io = |p: &Path, e: &dyn std::fmt::Display| CliError::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(dir, &e))?;
    let mut written = Vec::new();
    match format {
        OutputFormat::Json => {
            let path = dir.join("report.json");
            let mut text = serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            fs::write(&path, text).map_err(|e| io(&path, &e))?;
            written.push(path);
        }
        OutputFormat::Csv => {
            for table in &report.payload.tables {
                let path = dir.join(format!("{}.csv", table.name));
                write_csv(table, &path).map_err(|e| io(&path, &e))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn write_csv(table: &Table, path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(cell))?;
    }
    w.flush()?;
    Ok(())
}
