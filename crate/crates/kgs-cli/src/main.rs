//! Command-line driver: `kgs <experiment> --config <file> [--out <dir>]`.
//!
//! Exit codes: 0 all checks passed, 1 a check failed (report still written),
//! 2 the run could not start (bad usage, unreadable or invalid config,
//! unknown experiment) or failed before producing a report.

mod config;
mod experiments;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::RunConfig;
use experiments::{find, registry, RunContext};

const EXPERIMENT_HELP: &str = "\
Experiments:
  linear-schrodinger-check  boundary-driven free Schrodinger field against a finite-difference oracle
  linear-kg-check           boundary-driven free Klein-Gordon field against a finite-difference oracle
  local-solve               one-window coupled fixed-point solve (optionally against a coupled oracle)
  global-solve              window-by-window solve over a long horizon with restart bookkeeping
  uniqueness-check          twin solves under different wave extensions must agree on the half-line
  smoothing-check           Fourier-tail slope gap between nonlinear remainder and linear part
  estimates-lab             randomized resolution sweep of the bilinear space-time bounds
  report                    summarize report.json files from earlier runs";

#[derive(Parser)]
#[command(
    name = "kgs",
    about = "Spectral solver experiments for a coupled Schrodinger / Klein-Gordon system on the half-line",
    after_help = EXPERIMENT_HELP
)]
struct Cli {
    /// Experiment name (see the list below)
    experiment: String,
    /// Path to a TOML configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's out_dir; default runs/<experiment>)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("kgs: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<u8, String> {
    let cli = Cli::parse();

    if let Ok(raw) = std::env::var("KGS_THREADS") {
        let threads: usize = raw
            .parse()
            .map_err(|_| format!("KGS_THREADS must be a positive integer, got {raw:?}"))?;
        if threads == 0 {
            return Err("KGS_THREADS must be a positive integer".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| format!("thread pool: {e}"))?;
    }

    let exp = find(&cli.experiment).ok_or_else(|| {
        let names: Vec<_> = registry().iter().map(|e| e.name()).collect();
        format!(
            "unknown experiment {:?}; expected one of: {}",
            cli.experiment,
            names.join(", ")
        )
    })?;

    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| format!("cannot read {}: {e}", cli.config.display()))?;
    let cfg: RunConfig =
        toml::from_str(&text).map_err(|e| format!("{}: {e}", cli.config.display()))?;
    cfg.validate()
        .map_err(|e| format!("{}: {e}", cli.config.display()))?;
    if let Some(pinned) = &cfg.experiment {
        if pinned != exp.name() {
            return Err(format!(
                "config is pinned to experiment {pinned:?} but {:?} was requested",
                exp.name()
            ));
        }
    }

    let out_dir = cli
        .out
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs").join(exp.name()));
    let cfg_dir = cli
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));

    let mut cx = RunContext::new(&cfg, out_dir.clone(), cfg_dir, exp.name());
    exp.run(&mut cx).map_err(|e| format!("{e}"))?;

    let resolved = cfg.resolved(exp.name(), &out_dir);
    cx.report
        .write(&out_dir, &resolved)
        .map_err(|e| format!("writing report to {}: {e}", out_dir.display()))?;

    if cx.report.passed() {
        Ok(0)
    } else {
        for c in cx.report.failing() {
            eprintln!(
                "kgs: check failed: {} = {:.6e} (required {} {:.6e})",
                c.name, c.value, c.op, c.threshold
            );
        }
        eprintln!("kgs: see {}", out_dir.join("report.json").display());
        Ok(1)
    }
}
