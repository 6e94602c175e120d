//! Check records, summaries and the text/json emitters.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Format, SuiteConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub suite: String,
    pub check_id: String,
    /// Descriptive name of the identity under test.
    pub anchor: String,
    /// `None` when the check could not be evaluated.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
    pub runtime_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub config: SuiteConfig,
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl Report {
    pub fn new(config: SuiteConfig, records: Vec<Record>) -> Self {
        let passed = records.iter().filter(|r| r.passed).count();
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            summary: Summary { total: records.len(), passed, failed: records.len() - passed },
            records,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Header, one aligned line per record, and a summary line.
    pub fn to_text(&self) -> String {
        let w_suite = self.records.iter().map(|r| r.suite.len()).chain([5]).max().unwrap_or(5);
        let w_id = self.records.iter().map(|r| r.check_id.len()).chain([8]).max().unwrap_or(8);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<w_suite$}  {:<w_id$}  {:<6}  {:>10}  {:>9}  {:>9}  detail",
            "suite", "check_id", "result", "residual", "tolerance", "ms"
        );
        for r in &self.records {
            let residual = r.residual.map_or("-".to_string(), |v| format!("{v:.3e}"));
            let _ = writeln!(
                out,
                "{:<w_suite$}  {:<w_id$}  {:<6}  {:>10}  {:>9.1e}  {:>9.2}  {}",
                r.suite,
                r.check_id,
                if r.passed { "PASS" } else { "FAIL" },
                residual,
                r.tolerance,
                r.runtime_ms,
                r.detail
            );
        }
        let _ = writeln!(
            out,
            "summary: {} checks, {} passed, {} failed",
            self.summary.total, self.summary.passed, self.summary.failed
        );
        out
    }
}

/// Writes the report to `path`, or to standard output when `path` is `None`.
pub fn emit(report: &Report, format: Format, path: Option<&Path>) -> io::Result<()> {
    let body = match format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    match path {
        Some(p) => fs::write(p, body),
        None => io::stdout().lock().write_all(body.as_bytes()),
    }
}
