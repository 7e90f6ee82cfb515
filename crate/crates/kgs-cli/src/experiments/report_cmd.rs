//! Aggregates the `report.json` files written by earlier runs into one
//! pass/fail table.  Scans the immediate subdirectories of the output
//! directory, so its own summary file at the top level is never counted.

use anyhow::{bail, Context, Result};
use std::fs;
use std::path::PathBuf;

use super::{Experiment, RunContext};

pub struct ReportCmd;

struct RunRow {
    dir: String,
    experiment: String,
    passed: bool,
    checks: usize,
    failing: Vec<String>,
}

impl Experiment for ReportCmd {
    fn name(&self) -> &'static str {
        "report"
    }


    fn run(&self, cx: &mut RunContext) -> Result<()> {
        let mut dirs: Vec<PathBuf> = match fs::read_dir(&cx.out_dir) {
            Ok(entries) => entries
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.is_dir())
                .collect(),
            Err(e) => bail!("cannot scan {}: {e}", cx.out_dir.display()),
        };
        dirs.sort();

        let mut rows = Vec::new();
        for dir in dirs {
            let path = dir.join("report.json");
            if !path.is_file() {
                continue;
            }
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let v: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            let experiment = v["experiment"].as_str().unwrap_or("?").to_string();
            let passed = v["passed"].as_bool().unwrap_or(false);
            let checks = v["checks"].as_array().map_or(0, |a| a.len());
            let failing = v["checks"]
                .as_array()
                .map(|a| {
                    a.iter()
                        .filter(|c| !c["passed"].as_bool().unwrap_or(false))
                        .filter_map(|c| c["name"].as_str().map(str::to_string))
                        .collect()
                })
                .unwrap_or_default();
            rows.push(RunRow {
                dir: dir
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                experiment,
                passed,
                checks,
                failing,
            });
        }
        if rows.is_empty() {
            bail!(
                "no report.json found in any subdirectory of {}",
                cx.out_dir.display()
            );
        }

        println!("{:<24} {:<28} {:>7} {:>6}", "run", "experiment", "checks", "state");
        for r in &rows {
            let state = if r.passed { "pass" } else { "FAIL" };
            println!("{:<24} {:<28} {:>7} {:>6}", r.dir, r.experiment, r.checks, state);
            for name in &r.failing {
                println!("{:<24}   failing: {name}", "");
            }
        }

        let failed = rows.iter().filter(|r| !r.passed).count();
        cx.report.metric_count("runs_total", rows.len());
        cx.report.metric_count("runs_failed", failed);
        for r in &rows {
            cx.report
                .metric_flag(&format!("run_{}_passed", r.dir), r.passed);
        }
        cx.report.check_le("runs_failed", failed as f64, 0.0);
        Ok(())
    }
}
