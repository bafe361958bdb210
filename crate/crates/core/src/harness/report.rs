//! Convergence reports and their CSV/JSON serializations.
//!
//! Floating-point values are written with 12 significant digits, so a report
//! that is read back and written again reproduces the same bytes.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::scenario::REPORT_EPS;

/// CSV columns, in order. An `error` column is appended when a row failed.
pub const CSV_COLUMNS: [&str; 10] = [
    "n",
    "mean_index",
    "levy",
    "weak2d",
    "coherency_gap",
    "lemma1_gap",
    "lindeberg_0.05",
    "lyapunov",
    "seconds",
    "seed",
];

/// JSON Schema (draft 2020-12) of the JSON report.
pub const REPORT_SCHEMA: &str = r#"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "randsum convergence report",
  "type": "object",
  "required": ["name", "seed", "rows"],
  "additionalProperties": false,
  "properties": {
    "name": { "type": "string" },
    "seed": { "type": "integer", "minimum": 0 },
    "rows": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["n", "mean_index", "levy", "ks", "weak2d", "coherency_gap", "lemma1_gap",
                     "lindeberg", "lyapunov", "gf_bound", "seconds", "seed", "error"],
        "additionalProperties": false,
        "properties": {
          "n": { "type": "integer", "minimum": 1 },
          "mean_index": { "type": ["number", "null"] },
          "levy": { "type": ["number", "null"], "minimum": 0, "maximum": 2 },
          "ks": { "type": ["number", "null"], "minimum": 0, "maximum": 1 },
          "weak2d": { "type": ["number", "null"], "minimum": 0, "maximum": 1 },
          "coherency_gap": { "type": ["number", "null"], "minimum": 0, "maximum": 2 },
          "lemma1_gap": { "type": ["number", "null"], "minimum": 0, "maximum": 2 },
          "lindeberg": {
            "type": "array",
            "items": {
              "type": "object",
              "required": ["eps", "value"],
              "additionalProperties": false,
              "properties": {
                "eps": { "type": "number", "exclusiveMinimum": 0 },
                "value": { "type": "number", "minimum": 0, "maximum": 1 }
              }
            }
          },
          "lyapunov": { "type": ["number", "null"], "minimum": 0 },
          "gf_bound": { "type": ["number", "null"], "minimum": 0 },
          "seconds": { "type": "number", "minimum": 0 },
          "seed": { "type": "integer", "minimum": 0 },
          "error": { "type": ["string", "null"] }
        }
      }
    }
  }
}"#;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindebergValue {
    pub eps: f64,
    pub value: f64,
}

/// One row of the n-grid. Metric fields are `None` when the row failed or
/// when the value is not carried by the source format.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: u64,
    pub mean_index: Option<f64>,
    /// Lévy distance between the law of `Z_n` and the limit mixture.
    pub levy: Option<f64>,
    /// Kolmogorov distance for the same pair, a cross-check on `levy`.
    pub ks: Option<f64>,
    /// Bivariate distance between `(U_n, V_n)` and the limit pair.
    pub weak2d: Option<f64>,
    pub coherency_gap: Option<f64>,
    pub lemma1_gap: Option<f64>,
    pub lindeberg: Vec<LindebergValue>,
    pub lyapunov: Option<f64>,
    pub gf_bound: Option<f64>,
    pub seconds: f64,
    pub seed: u64,
    pub error: Option<String>,
}

impl ReportRow {
    pub fn lindeberg_at(&self, eps: f64) -> Option<f64> {
        self.lindeberg.iter().find(|l| l.eps == eps).map(|l| l.value)
    }

    fn rounded(&self) -> ReportRow {
        let r = |v: Option<f64>| v.map(round12);
        ReportRow {
            n: self.n,
            mean_index: r(self.mean_index),
            levy: r(self.levy),
            ks: r(self.ks),
            weak2d: r(self.weak2d),
            coherency_gap: r(self.coherency_gap),
            lemma1_gap: r(self.lemma1_gap),
            lindeberg: self
                .lindeberg
                .iter()
                .map(|l| LindebergValue { eps: round12(l.eps), value: round12(l.value) })
                .collect(),
            lyapunov: r(self.lyapunov),
            gf_bound: r(self.gf_bound),
            seconds: round12(self.seconds),
            seed: self.seed,
            error: self.error.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceReport {
    pub name: String,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::config("format", format!("expected csv or json, got \"{other}\""))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

/// Rounds to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

/// 12 significant digits in scientific notation; zero is written as `0`.
pub fn format12(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.11e}")
    }
}

fn opt12(v: Option<f64>) -> String {
    v.map(format12).unwrap_or_default()
}

impl ConvergenceReport {
    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let with_error = self.has_errors();
        let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
        if with_error {
            header.push("error");
        }
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut rec = vec![
                row.n.to_string(),
                opt12(row.mean_index),
                opt12(row.levy),
                opt12(row.weak2d),
                opt12(row.coherency_gap),
                opt12(row.lemma1_gap),
                opt12(row.lindeberg_at(REPORT_EPS)),
                opt12(row.lyapunov),
                format12(row.seconds),
                row.seed.to_string(),
            ];
            if with_error {
                rec.push(row.error.clone().unwrap_or_default());
            }
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    pub fn to_json(&self) -> String {
        let rounded = ConvergenceReport {
            name: self.name.clone(),
            seed: self.seed,
            rows: self.rows.iter().map(ReportRow::rounded).collect(),
        };
        let mut s = serde_json::to_string_pretty(&rounded).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
        }
    }

    /// Writes the report to `path`.
    pub fn emit(&self, format: ReportFormat, path: &Path) -> Result<()> {
        std::fs::write(path, self.render(format)).map_err(|source| Error::Io { path: path.to_path_buf(), source })
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads a CSV report. Only the CSV columns are recovered.
    pub fn from_csv(text: &str) -> std::result::Result<Self, String> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| e.to_string())?.clone();
        let names: Vec<&str> = header.iter().collect();
        let with_error = names.len() == CSV_COLUMNS.len() + 1 && names.last() == Some(&"error");
        if names[..CSV_COLUMNS.len().min(names.len())] != CSV_COLUMNS[..] || (names.len() != CSV_COLUMNS.len() && !with_error) {
            return Err(format!("unexpected header: {}", names.join(",")));
        }
        let num = |s: &str| -> std::result::Result<Option<f64>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| format!("not a number: {s:?}"))
            }
        };
        let int = |s: &str| -> std::result::Result<u64, String> { s.parse().map_err(|_| format!("not an integer: {s:?}")) };
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let lindeberg = num(&rec[6])?.map(|value| vec![LindebergValue { eps: REPORT_EPS, value }]).unwrap_or_default();
            let error = if with_error && !rec[10].is_empty() { Some(rec[10].to_string()) } else { None };
            rows.push(ReportRow {
                n: int(&rec[0])?,
                mean_index: num(&rec[1])?,
                levy: num(&rec[2])?,
                ks: None,
                weak2d: num(&rec[3])?,
                coherency_gap: num(&rec[4])?,
                lemma1_gap: num(&rec[5])?,
                lindeberg,
                lyapunov: num(&rec[7])?,
                gf_bound: None,
                seconds: num(&rec[8])?.unwrap_or(0.0),
                seed: int(&rec[9])?,
                error,
            });
        }
        let seed = rows.first().map(|r| r.seed).unwrap_or(0);
        Ok(ConvergenceReport { name: String::new(), seed, rows })
    }

    pub fn read(path: &Path, format: ReportFormat) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let parsed = match format {
            ReportFormat::Csv => Self::from_csv(&text),
            ReportFormat::Json => Self::from_json(&text),
        };
        parsed.map_err(|message| Error::Parse { what: "report", path: path.to_path_buf(), message })
    }
}
