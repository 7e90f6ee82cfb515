//! Single-window fixed-point solve: either one configured problem (with an
//! optional finite-difference cross-check) or a seeded batch of random
//! small-data problems exercising the contraction bounds.

use anyhow::{anyhow, Result};
use kgs_core::bourgain::random_sobolev_field;
use kgs_core::duhamel::{picard_solve, LocalProblem, WaveForcing};
use kgs_core::flows::PhiPair;
use kgs_core::grid::{forward, sobolev_norm, Field, SpatialGrid};
use kgs_core::boundary::BoundarySignal;
use kgs_core::oracle::{fd_kgs_coupled, FdGrid};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    field_of_row, rel_l2_vs_oracle, resolve_grid, select_window, steps_of, window_series,
    Experiment, RunContext,
};
use crate::config::{RunConfig, WaveForcingKind};

pub struct LocalSolve;

impl Experiment for LocalSolve {
    fn name(&self) -> &'static str {
        "local-solve"
    }


    fn run(&self, cx: &mut RunContext) -> Result<()> {
        if cx.cfg.suite.is_some() {
            run_suite(cx)
        } else {
            run_single(cx)
        }
    }
}

fn forcing_of(kind: WaveForcingKind) -> WaveForcing {
    match kind {
        WaveForcingKind::Whole => WaveForcing::Whole,
        WaveForcingKind::OddRestrict => WaveForcing::OddRestrict,
    }
}

fn run_single(cx: &mut RunContext) -> Result<()> {
    let cfg = cx.cfg;
    let grid = resolve_grid(cfg);
    let rk = cfg.kernel.to_core().resolve(grid).map_err(|e| anyhow!("{e}"))?;
    let dt = cfg.time.dt;

    let u0 = cfg.data.u0.build(grid, cfg.seed, &cx.cfg_dir)?;
    let n0 = cfg.data.n0.build(grid, cfg.seed, &cx.cfg_dir)?;
    let n1 = cfg.data.n1.build(grid, cfg.seed, &cx.cfg_dir)?;
    let g = cfg.boundary.g.build_complex(&cx.cfg_dir)?;
    let h = cfg.boundary.h.build_real(&cx.cfg_dir)?;

    let u_norm = sobolev_norm(&u0, cfg.regularity.s0);
    let wave_norm =
        sobolev_norm(&n0, cfg.regularity.s1) + sobolev_norm(&n1, cfg.regularity.s1 - 1.0);
    let t_window = match cfg.time.t_window {
        Some(t) => t,
        None => {
            let h_sup = (0..=steps_of(cfg.time.t_final, dt))
                .map(|m| h(m as f64 * dt).abs())
                .fold(0.0, f64::max);
            select_window(cfg.time.c_t, dt, u_norm, wave_norm + h_sup)
        }
    };
    let steps = steps_of(t_window, dt);

    let g_series = (!cfg.boundary.g.is_zero()).then(|| window_series(&*g, t_window, dt));
    let h_complex = |t: f64| Complex64::new(h(t), 0.0);
    let h_series = (!cfg.boundary.h.is_zero()).then(|| window_series(&h_complex, t_window, dt));

    let prob = LocalProblem {
        grid,
        dt,
        t_window,
        u0_hat: forward(&u0),
        phi: PhiPair::from_data(&n0, &n1),
        g: g_series.as_ref().map(BoundarySignal::sampled),
        h: h_series.as_ref().map(BoundarySignal::sampled),
        coupling_offset: None,
        wave_forcing: forcing_of(cfg.data.wave_forcing),
        kernel: rk,
        tol: cfg.picard.tol,
        max_iter: cfg.picard.max_iter,
        skip_rel: cfg.picard.skip_rel,
    };
    let sol = picard_solve(&prob);
    let d = &sol.diag;

    let max_ratio = d.ratios.iter().copied().fold(0.0, f64::max);
    cx.report.metric("t_window", t_window);
    cx.report.metric("u_norm", u_norm);
    cx.report.metric("wave_norm", wave_norm);
    cx.report.metric_count("iterations", d.iterations);
    cx.report.metric_flag("converged", d.converged);
    cx.report.metric("max_ratio", max_ratio);
    cx.report
        .metric("final_residual", d.residuals.last().copied().unwrap_or(0.0));
    cx.report.metric("scale", d.scale);
    cx.report.metric("imag_residue_n", d.imag_residue_n);
    cx.report.metric("q_sup", d.q_sup);
    cx.report.metric("z_sup", d.z_sup);

    let o = grid.origin_index();
    let trace_err_u = (0..=steps)
        .map(|m| (sol.u.row(m)[o] - g(m as f64 * dt)).norm())
        .fold(0.0, f64::max);
    let trace_err_n = (0..=steps)
        .map(|m| (sol.n.row(m)[o].re - h(m as f64 * dt)).abs())
        .fold(0.0, f64::max);
    cx.report.metric("trace_err_u", trace_err_u);
    cx.report.metric("trace_err_n", trace_err_n);

    let mass: Vec<f64> = (0..=steps)
        .map(|m| field_of_row(&sol.u, m).l2_norm_halfline())
        .collect();
    cx.report
        .metric("mass_drift", kgs_core::solver::relative_drift(&mass));

    cx.report.check_le(
        "max_ratio",
        max_ratio,
        cfg.tolerances.picard_ratio,
    );
    cx.report
        .check_le("iterations", d.iterations as f64, cfg.tolerances.picard_iters as f64);
    cx.report
        .check_le("unconverged", if d.converged { 0.0 } else { 1.0 }, 0.0);

    if cfg.fd.compare {
        let u0c = cfg.data.u0.halfline_closure(&cx.cfg_dir)?;
        let n0c = cfg.data.n0.halfline_closure(&cx.cfg_dir)?;
        let n1c = cfg.data.n1.halfline_closure(&cx.cfg_dir)?;
        let x_wall = cfg.fd.x_max.unwrap_or(grid.l());
        let fdg = FdGrid {
            x_max: x_wall,
            cells: cfg.fd.cells,
        };
        let track = fd_kgs_coupled(
            fdg,
            dt,
            steps,
            cfg.fd.refine,
            |x| u0c(x),
            |x| n0c(x).re,
            |x| n1c(x).re,
            |t| g(t),
            |t| h(t),
        );
        let x_cut = cfg.fd.x_cut.unwrap_or(0.9 * grid.l().min(x_wall));
        let plateau_u = sol.u.window(0, steps + 1);
        let plateau_n = sol.n.window(0, steps + 1);
        let rel_u = rel_l2_vs_oracle(&plateau_u, &track.xs, &track.u, x_cut);
        let rel_n = rel_l2_vs_oracle(&plateau_n, &track.xs, &track.n, x_cut);
        cx.report.metric("rel_l2_u_vs_oracle", rel_u);
        cx.report.metric("rel_l2_n_vs_oracle", rel_n);
        cx.report.metric("oracle_edge_sup", track.edge_sup);
        cx.report
            .check_le("rel_l2_u_vs_oracle", rel_u, cfg.tolerances.rel_l2);
        cx.report
            .check_le("rel_l2_n_vs_oracle", rel_n, cfg.tolerances.rel_l2);
    }

    cx.csv(
        "picard.csv",
        "iteration,residual",
        d.residuals
            .iter()
            .enumerate()
            .map(|(i, r)| format!("{},{}", i, r)),
    )?;
    cx.csv(
        "final_profile.csv",
        "x,u_re,u_im,n",
        (0..grid.n() / 2).map(|j| {
            let x = grid.x(o + j);
            let u = sol.u.row(steps)[o + j];
            let n = sol.n.row(steps)[o + j].re;
            format!("{},{},{},{}", x, u.re, u.im, n)
        }),
    )?;
    Ok(())
}

/// Random data scaled to the configured norms; one reproducible stream per
/// batch member.
fn suite_data(
    cfg: &RunConfig,
    grid: SpatialGrid,
    index: u64,
) -> (Field, Field, Field, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(index.wrapping_mul(0x9e37)));
    let suite = cfg.suite.as_ref().expect("suite config");
    let s0 = cfg.regularity.s0;
    let s1 = cfg.regularity.s1;

    let u0 = random_sobolev_field(grid, s0, &mut rng).scale(Complex64::new(suite.norm_u, 0.0));

    let realize = |f: Field, s: f64, target: f64| -> Field {
        let mut g = f;
        for v in g.values.iter_mut() {
            *v = Complex64::new(v.re, 0.0);
        }
        let have = sobolev_norm(&g, s);
        g.scale(Complex64::new(target / have.max(1e-300), 0.0))
    };
    let n0 = realize(
        random_sobolev_field(grid, s1, &mut rng),
        s1,
        0.5 * suite.norm_wave,
    );
    let n1 = realize(
        random_sobolev_field(grid, s1 - 1.0, &mut rng),
        s1 - 1.0,
        0.5 * suite.norm_wave,
    );
    (u0, n0, n1, suite.norm_u, suite.norm_wave)
}

fn run_suite(cx: &mut RunContext) -> Result<()> {
    let cfg = cx.cfg;
    let grid = resolve_grid(cfg);
    let rk = cfg.kernel.to_core().resolve(grid).map_err(|e| anyhow!("{e}"))?;
    let dt = cfg.time.dt;
    let seeds = cfg.suite.as_ref().expect("suite config").seeds;

    let mut rows = Vec::with_capacity(seeds);
    let mut worst_ratio: f64 = 0.0;
    let mut worst_iters = 0usize;
    let mut unconverged = 0usize;
    let mut t_window_used = 0.0;

    for i in 0..seeds {
        let (u0, n0, n1, u_norm, wave_norm) = suite_data(cfg, grid, i as u64);
        let t_window = match cfg.time.t_window {
            Some(t) => t,
            None => select_window(cfg.time.c_t, dt, u_norm, wave_norm),
        };
        t_window_used = t_window;
        let prob = LocalProblem {
            grid,
            dt,
            t_window,
            u0_hat: forward(&u0),
            phi: PhiPair::from_data(&n0, &n1),
            g: None,
            h: None,
            coupling_offset: None,
            wave_forcing: WaveForcing::Whole,
            kernel: rk.clone(),
            tol: cfg.picard.tol,
            max_iter: cfg.picard.max_iter,
            skip_rel: cfg.picard.skip_rel,
        };
        let sol = picard_solve(&prob);
        let d = sol.diag;
        let ratio = d.ratios.iter().copied().fold(0.0, f64::max);
        worst_ratio = worst_ratio.max(ratio);
        worst_iters = worst_iters.max(d.iterations);
        if !d.converged {
            unconverged += 1;
        }
        rows.push(format!(
            "{},{},{},{},{},{}",
            i,
            d.iterations,
            ratio,
            d.residuals.last().copied().unwrap_or(0.0),
            d.converged,
            d.scale
        ));
    }

    cx.report.metric_count("problems", seeds);
    cx.report.metric("t_window", t_window_used);
    cx.report.metric("worst_ratio", worst_ratio);
    cx.report.metric_count("worst_iterations", worst_iters);
    cx.report.metric_count("unconverged", unconverged);

    cx.report
        .check_le("worst_ratio", worst_ratio, cfg.tolerances.picard_ratio);
    cx.report.check_le(
        "worst_iterations",
        worst_iters as f64,
        cfg.tolerances.picard_iters as f64,
    );
    cx.report
        .check_le("unconverged", unconverged as f64, 0.0);

    cx.csv(
        "suite.csv",
        "problem,iterations,max_ratio,final_residual,converged,scale",
        rows,
    )?;
    Ok(())
}
