//! Deterministic CSV and JSON rendering. JSON objects use sorted keys.

use std::io::Write;
use std::path::Path;

use density_forge_core::density::DensityProfile;
use density_forge_core::set_calculus::Verdict;
use density_forge_core::{Density, Nat};
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A command result: one JSON document and one CSV table, plus whether any
/// part of it was cut short by a budget.
#[derive(Clone, Debug)]
pub struct Report {
    pub json: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub partial: bool,
}

impl Report {
    pub fn new(json: Value, header: Vec<&'static str>, rows: Vec<Vec<String>>, partial: bool) -> Self {
        Report { json, header, rows, partial }
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, std::io::Error> {
        match format {
            Format::Json => {
                let mut doc = self.json.clone();
                if let Value::Object(map) = &mut doc {
                    map.insert("partial".into(), Value::Bool(self.partial));
                }
                let mut out = serde_json::to_vec_pretty(&doc)?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header)?;
                for row in &self.rows {
                    w.write_record(row)?;
                }
                w.into_inner().map_err(|e| e.into_error())
            }
        }
    }
}

/// Write to `out`, or to stdout when absent.
pub fn write_bytes(out: Option<&Path>, bytes: &[u8]) -> Result<(), std::io::Error> {
    match out {
        Some(path) => std::fs::write(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}

pub fn write_json(out: &Path, value: &Value) -> Result<(), std::io::Error> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(out, bytes)
}

pub fn density_json(d: Density) -> Value {
    json!({"numerator": d.numer(), "denominator": d.denom()})
}

/// Six decimals, for eyeballing only.
pub fn lossy(d: Density) -> String {
    format!("{:.6}", *d.numer() as f64 / *d.denom() as f64)
}

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::In => "in",
        Verdict::Out => "out",
        Verdict::Unknown => "unknown",
    }
}

pub const PROFILE_HEADER: [&str; 6] = ["n", "count", "numerator", "denominator", "unresolved", "decimal_lossy"];

pub fn profile_rows(p: &DensityProfile) -> Vec<Vec<String>> {
    (0..p.len())
        .map(|i| {
            let v = p.values[i];
            vec![
                p.checkpoints[i].to_string(),
                p.counts[i].to_string(),
                v.numer().to_string(),
                v.denom().to_string(),
                p.unresolved[i].to_string(),
                lossy(v),
            ]
        })
        .collect()
}

pub fn profile_json(p: &DensityProfile) -> Value {
    Value::Array(
        (0..p.len())
            .map(|i| {
                json!({
                    "n": p.checkpoints[i],
                    "count": p.counts[i],
                    "numerator": p.values[i].numer(),
                    "denominator": p.values[i].denom(),
                    "unresolved": p.unresolved[i],
                })
            })
            .collect(),
    )
}

pub fn nats(values: &[Nat]) -> Value {
    Value::Array(values.iter().map(|&v| Value::from(v)).collect())
}
