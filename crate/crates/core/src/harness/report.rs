use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One representation's metrics and timings. Absent values are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub representation: String,
    pub pis: Option<f64>,
    pub iis: Option<f64>,
    pub pkid: Option<f64>,
    pub ikid: Option<f64>,
    pub fad: Option<f64>,
    /// KID on the general-purpose embeddings used for FAD.
    pub kid: Option<f64>,
    pub encode_time_s: Option<f64>,
    pub decode_time_s: Option<f64>,
}

impl ReportRow {
    pub fn new(representation: impl Into<String>) -> Self {
        Self {
            representation: representation.into(),
            ..Default::default()
        }
    }

    fn values(&self) -> [Option<f64>; 8] {
        [
            self.pis,
            self.iis,
            self.pkid,
            self.ikid,
            self.fad,
            self.kid,
            self.encode_time_s,
            self.decode_time_s,
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub config_hash: String,
    pub seed: u64,
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub meta: ReportMeta,
}

impl EvalReport {
    pub fn validate(&self) -> Result<()> {
        for row in &self.rows {
            for t in [row.encode_time_s, row.decode_time_s].into_iter().flatten() {
                if !(t >= 0.0) {
                    return Err(invalid(format!(
                        "{}: negative time {t}",
                        row.representation
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(invalid(format!(
                "unknown report format {s:?} (csv, markdown)"
            ))),
        }
    }
}

const COLUMNS: [&str; 9] = [
    "representation",
    "PIS",
    "IIS",
    "PKID",
    "IKID",
    "FAD",
    "KID",
    "encode_time_s",
    "decode_time_s",
];

const MISSING: &str = "-";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn markdown_number(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

/// Renders the report. CSV keeps full precision and uses CRLF line breaks;
/// markdown rounds for reading and lists the metadata under the table.
pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(&COLUMNS.join(","));
            out.push_str("\r\n");
            for row in &report.rows {
                let mut fields = vec![csv_field(&row.representation)];
                fields.extend(
                    row.values()
                        .iter()
                        .map(|v| v.map_or(MISSING.to_string(), |v| v.to_string())),
                );
                out.push_str(&fields.join(","));
                out.push_str("\r\n");
            }
        }
        ReportFormat::Markdown => {
            let _ = writeln!(out, "| {} |", COLUMNS.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(COLUMNS.len()));
            for row in &report.rows {
                let cells: Vec<String> = row
                    .values()
                    .iter()
                    .map(|v| v.map_or(MISSING.to_string(), markdown_number))
                    .collect();
                let name = row.representation.replace('|', "\\|");
                let _ = writeln!(out, "| {name} | {} |", cells.join(" | "));
            }
            let meta = &report.meta;
            let _ = write!(
                out,
                "\nconfig hash: `{}`, seed: {}",
                meta.config_hash, meta.seed
            );
            if let Some(ts) = &meta.timestamp {
                let _ = write!(out, ", generated: {ts}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn emit_report(
    report: &EvalReport,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    report.validate()?;
    Ok(fs::write(path, render_report(report, format))?)
}
