//! Deterministic run reports: named metrics, threshold checks, CSV
//! trajectories, and an atomically written JSON envelope.
//!
//! Serialization uses struct-declaration order and insertion-ordered vectors
//! only, and no timestamps, so a fixed seed and configuration reproduce the
//! report byte for byte.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub op: &'static str,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricRecord {
    pub name: String,
    pub value: serde_json::Value,
}

/// Accumulates a single experiment's outcome.
pub struct Report {
    experiment: String,
    checks: Vec<CheckRecord>,
    metrics: Vec<MetricRecord>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    experiment: &'a str,
    passed: bool,
    checks: &'a [CheckRecord],
    metrics: &'a [MetricRecord],
    config: &'a RunConfig,
}

fn number(v: f64) -> serde_json::Value {
    match serde_json::Number::from_f64(v) {
        Some(n) => serde_json::Value::Number(n),
        None => serde_json::Value::String(format!("{v}")),
    }
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Report {
            experiment: experiment.to_string(),
            checks: Vec::new(),
            metrics: Vec::new(),
        }
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push(MetricRecord {
            name: name.to_string(),
            value: number(value),
        });
    }

    pub fn metric_count(&mut self, name: &str, value: usize) {
        self.metrics.push(MetricRecord {
            name: name.to_string(),
            value: serde_json::Value::from(value as u64),
        });
    }

    pub fn metric_flag(&mut self, name: &str, value: bool) {
        self.metrics.push(MetricRecord {
            name: name.to_string(),
            value: serde_json::Value::from(value),
        });
    }

    fn push_check(&mut self, name: &str, value: f64, threshold: f64, op: &'static str, passed: bool) -> bool {
        self.checks.push(CheckRecord {
            name: name.to_string(),
            value,
            threshold,
            op,
            passed,
        });
        passed
    }

    /// Records `value <= threshold`; a non-finite value always fails.
    pub fn check_le(&mut self, name: &str, value: f64, threshold: f64) -> bool {
        let passed = value.is_finite() && value <= threshold;
        self.push_check(name, value, threshold, "<=", passed)
    }

    /// Records `value >= threshold`; a non-finite value always fails.
    pub fn check_ge(&mut self, name: &str, value: f64, threshold: f64) -> bool {
        let passed = value.is_finite() && value >= threshold;
        self.push_check(name, value, threshold, ">=", passed)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self, config: &RunConfig) -> String {
        let env = Envelope {
            experiment: &self.experiment,
            passed: self.passed(),
            checks: &self.checks,
            metrics: &self.metrics,
            config,
        };
        let mut s = serde_json::to_string_pretty(&env).expect("report serialization");
        s.push('\n');
        s
    }

    /// Writes `report.json` into `dir` (created if needed) atomically.
    pub fn write(&self, dir: &Path, config: &RunConfig) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        write_atomic(&dir.join("report.json"), self.to_json(config).as_bytes())
    }
}

/// Write-then-rename so readers never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Writes a CSV file with the given header and preformatted rows.
pub fn write_csv<I>(dir: &Path, name: &str, header: &str, rows: I) -> io::Result<()>
where
    I: IntoIterator<Item = String>,
{
    fs::create_dir_all(dir)?;
    let mut text = String::with_capacity(4096);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    write_atomic(&dir.join(name), text.as_bytes())
}
