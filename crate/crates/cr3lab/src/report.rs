//! Machine-readable check reports.
//!
//! Every check row carries the anchor of the identity it verifies; a report
//! with an unanchored row fails validation. Reports serialize to JSON (field
//! order fixed by the struct) and to CSV; wall-clock timing is kept out of
//! the serialized forms so reruns with the same configuration and seed are
//! byte-identical.

use crate::{Result, Scalar};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    /// Anchor of the identity being checked (e.g. "eq 6", "eq 2018H").
    pub anchor: String,
    pub residual: Scalar,
    pub tolerance: Scalar,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub model: String,
    pub n: usize,
    pub seed: u64,
    pub rows: Vec<CheckRow>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, model: &str, n: usize, seed: u64) -> Self {
        Report {
            command: command.to_string(),
            model: model.to_string(),
            n,
            seed,
            rows: Vec::new(),
            passed: true,
        }
    }

    pub fn push(&mut self, name: &str, anchor: &str, residual: Scalar, tolerance: Scalar) {
        let pass = residual.abs() <= tolerance;
        self.passed &= pass;
        self.rows.push(CheckRow {
            name: name.to_string(),
            anchor: anchor.to_string(),
            residual,
            tolerance,
            pass,
        });
    }

    /// Boolean check rows (verdicts rather than residuals).
    pub fn push_verdict(&mut self, name: &str, anchor: &str, pass: bool) {
        self.passed &= pass;
        self.rows.push(CheckRow {
            name: name.to_string(),
            anchor: anchor.to_string(),
            residual: if pass { 0.0 } else { 1.0 },
            tolerance: 0.5,
            pass,
        });
    }

    /// Schema contract: every row needs a nonempty anchor.
    pub fn validate(&self) -> Result<()> {
        for row in &self.rows {
            if row.anchor.trim().is_empty() {
                return Err(crate::Error::Config(format!(
                    "report row '{}' has no anchor",
                    row.name
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,anchor,residual,tolerance,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:e},{:e},{}\n",
                r.name, r.anchor, r.residual, r.tolerance, r.pass
            ));
        }
        out
    }

    /// One human line per row, plus a summary.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!(
                "{:<44} {:<10} {:>12.3e}  tol {:>8.1e}  {}\n",
                r.name,
                r.anchor,
                r.residual,
                r.tolerance,
                if r.pass { "pass" } else { "FAIL" }
            ));
        }
        out.push_str(&format!(
            "{}: {} of {} checks passed\n",
            if self.passed { "ok" } else { "FAILED" },
            self.rows.iter().filter(|r| r.pass).count(),
            self.rows.len()
        ));
        out
    }
}
