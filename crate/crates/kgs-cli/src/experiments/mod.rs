//! Experiment registry: each subcommand is a trait object dispatched by
//! name, sharing one configuration schema and one report format.

use std::path::PathBuf;

use anyhow::Result;
use kgs_core::cutoff::eta_scaled;
use kgs_core::grid::{Field, SpatialGrid};
use kgs_core::halfline::TimeSeries;
use kgs_core::oracle::sample_linear;
use kgs_core::spacetime::SpaceTimeField;
use num_complex::Complex64;

use crate::config::RunConfig;
use crate::report::{write_csv, Report};

pub mod estimates_lab;
pub mod global_solve;
pub mod linear_kg;
pub mod linear_schrodinger;
pub mod local_solve;
pub mod report_cmd;
pub mod smoothing;
pub mod uniqueness;

/// Everything an experiment needs: the validated configuration, where to
/// write artifacts, and the report under construction.
pub struct RunContext<'a> {
    pub cfg: &'a RunConfig,
    /// Directory for report.json and CSV trajectories.
    pub out_dir: PathBuf,
    /// Anchor for relative paths inside the configuration.
    pub cfg_dir: PathBuf,
    pub report: Report,
}

impl<'a> RunContext<'a> {
    pub fn new(cfg: &'a RunConfig, out_dir: PathBuf, cfg_dir: PathBuf, experiment: &str) -> Self {
        RunContext {
            cfg,
            out_dir,
            cfg_dir,
            report: Report::new(experiment),
        }
    }

    /// Writes a trajectory CSV unless outputs are disabled.
    pub fn csv<I>(&self, name: &str, header: &str, rows: I) -> Result<()>
    where
        I: IntoIterator<Item = String>,
    {
        if self.cfg.outputs.trajectories {
            write_csv(&self.out_dir, name, header, rows)?;
        }
        Ok(())
    }
}

pub trait Experiment: Sync {
    /// Subcommand name.
    fn name(&self) -> &'static str;
    fn run(&self, cx: &mut RunContext) -> Result<()>;
}

/// All experiments, in the order they appear in the usage screen.
pub fn registry() -> Vec<Box<dyn Experiment>> {
    vec![
        Box::new(linear_schrodinger::LinearSchrodingerCheck),
        Box::new(linear_kg::LinearKgCheck),
        Box::new(local_solve::LocalSolve),
        Box::new(global_solve::GlobalSolve),
        Box::new(uniqueness::UniquenessCheck),
        Box::new(smoothing::SmoothingCheck),
        Box::new(estimates_lab::EstimatesLab),
        Box::new(report_cmd::ReportCmd),
    ]
}

pub fn find(name: &str) -> Option<Box<dyn Experiment>> {
    registry().into_iter().find(|e| e.name() == name)
}

// ---------------------------------------------------------------------------
// Shared numerics helpers.

/// The spatial grid declared by the configuration.
pub fn resolve_grid(cfg: &RunConfig) -> SpatialGrid {
    SpatialGrid::new(cfg.grid.l, cfg.grid.n)
}

/// Number of dense steps covering [0, t].
pub fn steps_of(t: f64, dt: f64) -> usize {
    (t / dt).round() as usize
}

/// Dense times 0, dt, ..., t.
pub fn dense_times(t: f64, dt: f64) -> Vec<f64> {
    (0..=steps_of(t, dt)).map(|m| m as f64 * dt).collect()
}

/// Samples a drive over the doubled window [0, 2T], damped so it vanishes at
/// the window end (one-sided transforms need compactly supported signals).
pub fn damped_series(f: &dyn Fn(f64) -> Complex64, t_window: f64, dt: f64) -> TimeSeries {
    let len = 2 * steps_of(t_window, dt) + 1;
    TimeSeries::from_fn(dt, len, |t| eta_scaled(t, t_window) * f(t))
}

/// Samples a drive over the doubled window [0, 2T] without damping (the
/// fixed-point solver damps internally).
pub fn window_series(f: &dyn Fn(f64) -> Complex64, t_window: f64, dt: f64) -> TimeSeries {
    let len = 2 * steps_of(t_window, dt) + 1;
    TimeSeries::from_fn(dt, len, |t| f(t))
}

/// The norm-driven window-length rule: c_t * min(1, norms^-2), snapped down
/// to the dense grid and floored at two steps.
pub fn select_window(c_t: f64, dt: f64, u_norm: f64, wave_norm: f64) -> f64 {
    let mut t = c_t;
    if u_norm > 1.0 {
        t = t.min(c_t / (u_norm * u_norm));
    }
    if wave_norm > 1.0 {
        t = t.min(c_t / (wave_norm * wave_norm));
    }
    let steps = (t / dt).floor().max(2.0);
    steps * dt
}

/// One spatial snapshot of a trajectory as a standalone field.
pub fn field_of_row(f: &SpaceTimeField, m: usize) -> Field {
    Field {
        grid: f.grid,
        values: f.row(m).to_vec(),
    }
}

/// Sup over the half line of one trajectory row.
pub fn row_halfline_sup(f: &SpaceTimeField, m: usize) -> f64 {
    let o = f.grid.origin_index();
    f.row(m)[o..].iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Relative space-time L2 distance between a spectral trajectory (half-line
/// part, up to x_cut) and an oracle track sampled on its own grid.  Row `m`
/// of the trajectory is compared against oracle row `m`.
pub fn rel_l2_vs_oracle(
    spec: &SpaceTimeField,
    oracle_xs: &[f64],
    oracle_rows: &[Vec<Complex64>],
    x_cut: f64,
) -> f64 {
    assert!(
        oracle_rows.len() >= spec.snapshots(),
        "oracle track shorter than the spectral trajectory"
    );
    let o = spec.grid.origin_index();
    let mut num = 0.0;
    let mut den = 0.0;
    for m in 0..spec.snapshots() {
        let row = spec.row(m);
        let fd = &oracle_rows[m];
        for j in 0..spec.grid.n() / 2 {
            let x = spec.grid.x(o + j);
            if x > x_cut {
                break;
            }
            let reference = sample_linear(oracle_xs, fd, x);
            num += (row[o + j] - reference).norm_sqr();
            den += reference.norm_sqr();
        }
    }
    (num / den.max(1e-300)).sqrt()
}

/// Least-squares line fit y = slope x + intercept with the largest absolute
/// residual.
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_resid: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx.max(1e-300);
    let intercept = my - slope * mx;
    let max_resid = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    LineFit {
        slope,
        intercept,
        max_resid,
    }
}

/// `count` geometrically spaced points spanning [lo, hi].
pub fn geomspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let step = (hi / lo).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| lo * step.powi(i as i32)).collect()
}
