use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

/// One verified invariant with its measured margin.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Failure predicted by theory; does not fail the run.
    pub expected_failure: bool,
    pub measured: f64,
    pub threshold: f64,
    /// Distance to the threshold, positive when the check passes.
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `measured ≤ threshold`.
    pub fn at_most(name: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, threshold, threshold - measured)
    }

    /// Passes when `measured ≥ threshold`.
    pub fn at_least(name: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, threshold, measured - threshold)
    }

    fn new(name: &str, measured: f64, threshold: f64, margin: f64) -> Self {
        Self {
            name: name.to_string(),
            // NaN margins fail
            passed: margin >= 0.0,
            expected_failure: false,
            measured,
            threshold,
            margin,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn expected_to_fail(mut self) -> Self {
        self.expected_failure = true;
        self
    }

    /// Counts toward the exit status.
    pub fn ok(&self) -> bool {
        self.passed || self.expected_failure
    }
}

/// Machine-readable outcome of one command.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ReportDocument {
    pub fn new(command: &str, inputs: Value, results: Value, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(Check::ok);
        Self {
            command: command.to_string(),
            inputs,
            results,
            checks,
            passed,
        }
    }
}

/// Round-trip formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// A CSV table held in memory until written.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> csv::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

/// Table of checks, one row each.
pub fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["name", "passed", "expected_failure", "measured", "threshold", "margin"]);
    for c in checks {
        t.push(vec![
            c.name.clone(),
            c.passed.to_string(),
            c.expected_failure.to_string(),
            fmt_f64(c.measured),
            fmt_f64(c.threshold),
            fmt_f64(c.margin),
        ]);
    }
    t
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match path {
        Some(p) => File::create(p)?.write_all(bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
    }
}

pub fn json_bytes(doc: &ReportDocument) -> serde_json::Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(doc)?;
    v.push(b'\n');
    Ok(v)
}
