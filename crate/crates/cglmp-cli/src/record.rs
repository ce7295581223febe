//! Scan records and their CSV / JSON-lines encodings.

use std::collections::HashMap;
use std::io;
use std::path::Path;

use cglmp::Side;
use serde_json::json;

/// Exact column order of the CSV encoding.
pub const CSV_HEADER: &str =
    "d,side,extremal_value,f_min,violation_flag,entropy,entropy_ratio,iterations,residual,wall_time_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

/// One solved (d, side) pair. Reals are serialized in the shortest
/// round-trip decimal form, so parsing an emitted file reproduces the
/// in-memory values bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    pub d: usize,
    pub side: Side,
    pub extremal_value: f64,
    pub f_min: f64,
    pub violation_flag: bool,
    pub entropy: f64,
    pub entropy_ratio: f64,
    pub iterations: usize,
    pub residual: f64,
    pub wall_time_ms: u64,
}

/// A scan row: a record, or a per-d failure the sweep records and
/// moves past.
#[derive(Debug, Clone, PartialEq)]
pub enum ScanRow {
    Done(ScanRecord),
    Failed { d: usize, side: Side, error: String },
}

impl ScanRow {
    pub fn is_failed(&self) -> bool {
        matches!(self, ScanRow::Failed { .. })
    }

    /// CSV line under [`CSV_HEADER`]. Failure rows keep d and side,
    /// leave every value column empty, and append a quoted error
    /// column.
    pub fn csv_line(&self) -> String {
        match self {
            ScanRow::Done(r) => format!(
                "{},{},{},{},{},{},{},{},{},{}",
                r.d,
                r.side,
                r.extremal_value,
                r.f_min,
                r.violation_flag,
                r.entropy,
                r.entropy_ratio,
                r.iterations,
                r.residual,
                r.wall_time_ms
            ),
            ScanRow::Failed { d, side, error } => {
                format!("{d},{side},,,,,,,,,{}", csv_quote(error))
            }
        }
    }

    /// JSON-lines form; failure rows carry an `error` field and no
    /// `violation_flag`.
    pub fn json_line(&self) -> String {
        match self {
            ScanRow::Done(r) => json!({
                "d": r.d,
                "side": r.side.to_string(),
                "extremal_value": r.extremal_value,
                "f_min": r.f_min,
                "violation_flag": r.violation_flag,
                "entropy": r.entropy,
                "entropy_ratio": r.entropy_ratio,
                "iterations": r.iterations,
                "residual": r.residual,
                "wall_time_ms": r.wall_time_ms,
            })
            .to_string(),
            ScanRow::Failed { d, side, error } => {
                json!({ "d": d, "side": side.to_string(), "error": error }).to_string()
            }
        }
    }

    pub fn line(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv_line(),
            Format::Jsonl => self.json_line(),
        }
    }
}

pub fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Successful rows of an existing output file, verbatim, keyed by
/// (d, side). Failure rows are dropped so a resumed run retries them.
pub fn preserved_rows(path: &Path, format: Format) -> io::Result<HashMap<(usize, Side), String>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    if format == Format::Csv {
        match lines.next() {
            Some(h) if h == CSV_HEADER => {}
            _ => {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!(
                        "{} is not a cglmp scan CSV (header mismatch)",
                        path.display()
                    ),
                ))
            }
        }
    }
    let mut map = HashMap::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        if let Some(key) = successful_key(line, format) {
            map.insert(key, line.to_string());
        }
    }
    Ok(map)
}

/// (d, side) of a successful row; None for failure rows and anything
/// unparseable.
fn successful_key(line: &str, format: Format) -> Option<(usize, Side)> {
    match format {
        Format::Csv => {
            let fields: Vec<&str> = line.split(',').collect();
            // Failure rows have an 11th column and empty value fields.
            if fields.len() != 10 || fields[2..].iter().any(|f| f.is_empty()) {
                return None;
            }
            Some((fields[0].parse().ok()?, fields[1].parse().ok()?))
        }
        Format::Jsonl => {
            let v: serde_json::Value = serde_json::from_str(line).ok()?;
            if v.get("error").is_some() {
                return None;
            }
            let d = v.get("d")?.as_u64()? as usize;
            let side: Side = v.get("side")?.as_str()?.parse().ok()?;
            Some((d, side))
        }
    }
}

/// Same as [`preserved_rows`] for a `.states.jsonl` companion file.
pub fn preserved_states(path: &Path) -> io::Result<HashMap<(usize, Side), String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let Ok(v) = serde_json::from_str::<serde_json::Value>(line) else {
            continue;
        };
        let (Some(d), Some(side)) = (v.get("d").and_then(|x| x.as_u64()), v.get("side")) else {
            continue;
        };
        let Some(side) = side.as_str().and_then(|s| s.parse::<Side>().ok()) else {
            continue;
        };
        if v.get("schmidt_coefficients").is_some_and(|a| a.is_array()) {
            map.insert((d as usize, side), line.to_string());
        }
    }
    Ok(map)
}
