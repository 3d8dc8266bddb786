//! CSV/JSON rendering with a provenance header.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::spec::{ExperimentSpec, Format};
use crate::CliError;

/// Shortest round-trip scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(command: &'static str, spec: &ExperimentSpec) -> Self {
        let canonical = serde_json::to_string(&spec.provenance_view()).expect("spec serialises");
        let digest = Sha256::digest(canonical.as_bytes());
        Self {
            tool: "las-mud",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed: spec.seed,
        }
    }

    fn comment_lines(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# {} {}\n# command: {}\n# config-sha256: {}\n# seed: {}\n",
            self.tool, self.version, self.command, self.config_sha256, seed
        )
    }
}

/// Result of one command before rendering.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub table: Table,
    pub json: Value,
    pub exit_code: i32,
    /// Human-readable notes for stderr.
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn ok(table: Table, json: Value) -> Self {
        Self {
            table,
            json,
            exit_code: 0,
            notes: Vec::new(),
        }
    }
}

pub fn render(outcome: &Outcome, prov: &Provenance, format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&outcome.table.header)?;
            for row in &outcome.table.rows {
                w.write_record(row)?;
            }
            let body = String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.into_error()))?)
                .expect("csv output is utf-8");
            Ok(prov.comment_lines() + &body)
        }
        Format::Json => {
            let doc = serde_json::json!({ "provenance": prov, "result": outcome.json });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
    }
}

/// Parses rendered CSV back into a table, skipping comment lines.
pub fn parse_csv(text: &str) -> Result<Table, CliError> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()?;
    Ok(Table { header, rows })
}
