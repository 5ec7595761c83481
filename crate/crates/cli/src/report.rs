//! Experiment reports and deterministic output files.
//!
//! Every experiment produces one JSON report plus zero or more plot CSVs.
//! All maps are ordered and all rows are written in explicit order, so a
//! rerun with the same seed produces byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Outcome of one experiment: scalar metrics, free-form notes, and whether
/// the experiment's headline claim held.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn new(name: &str, seed: u64) -> Self {
        ExperimentReport {
            name: name.to_string(),
            seed,
            params: BTreeMap::new(),
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            passed: true,
        }
    }

    pub fn add_param(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub fn add_metric(&mut self, key: impl Into<String>, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    pub fn add_note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Records a failed claim: marks the report failed and notes why.
    pub fn fail(&mut self, reason: impl Into<String>) {
        self.passed = false;
        self.notes.push(format!("FAILED: {}", reason.into()));
    }

    /// Asserts one headline condition, failing the report when it is false.
    pub fn claim(&mut self, description: &str, holds: bool) {
        if holds {
            self.notes.push(format!("holds: {}", description));
        } else {
            self.fail(description.to_string());
        }
    }

    /// Writes `<out>/<name>_report.json` and returns its path.
    pub fn write(&self, out: &Path) -> anyhow::Result<PathBuf> {
        fs::create_dir_all(out)?;
        let path = out.join(format!("{}_report.json", self.name));
        let mut file = fs::File::create(&path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        writeln!(file)?;
        Ok(path)
    }

    pub fn summary_line(&self) -> String {
        format!("{}: {}", self.name, if self.passed { "PASS" } else { "FAIL" })
    }
}

/// Writes a plot CSV (`header` line, then `rows`) and returns its path.
pub fn write_plot_csv(
    out: &Path,
    file_name: &str,
    header: &str,
    rows: &[String],
) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(out)?;
    let path = out.join(file_name);
    let mut file = fs::File::create(&path)?;
    writeln!(file, "{}", header)?;
    for row in rows {
        writeln!(file, "{}", row)?;
    }
    Ok(path)
}
