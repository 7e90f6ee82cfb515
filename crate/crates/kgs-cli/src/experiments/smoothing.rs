//! Nonlinear-smoothing measurement: after one window, the solution minus its
//! full linear part (free flow plus boundary corrector) must carry a visibly
//! steeper Fourier tail than the linear part itself.

use anyhow::{anyhow, bail, Result};
use kgs_core::boundary::{schrodinger_boundary_w0_field, BoundarySignal};
use kgs_core::cutoff::eta_scaled;
use kgs_core::duhamel::{picard_solve, LocalProblem};
use kgs_core::flows::{schrodinger_flow_spec, PhiPair};
use kgs_core::grid::{forward, inverse};
use kgs_core::halfline::TimeSeries;
use num_complex::Complex64;

use super::{
    field_of_row, fit_line, geomspace, resolve_grid, select_window, steps_of, window_series,
    Experiment, RunContext,
};
use crate::config::WaveForcingKind;

pub struct SmoothingCheck;

impl Experiment for SmoothingCheck {
    fn name(&self) -> &'static str {
        "smoothing-check"
    }


    fn run(&self, cx: &mut RunContext) -> Result<()> {
        let cfg = cx.cfg;
        let grid = resolve_grid(cfg);
        let rk = cfg.kernel.to_core().resolve(grid).map_err(|e| anyhow!("{e}"))?;
        let dt = cfg.time.dt;

        let u0 = cfg.data.u0.build(grid, cfg.seed, &cx.cfg_dir)?;
        let n0 = cfg.data.n0.build(grid, cfg.seed, &cx.cfg_dir)?;
        let n1 = cfg.data.n1.build(grid, cfg.seed, &cx.cfg_dir)?;
        if cfg.data.n0.is_zero() && cfg.data.n1.is_zero() {
            bail!("smoothing-check needs wave data: with n = 0 the coupling vanishes");
        }
        let g = cfg.boundary.g.build_complex(&cx.cfg_dir)?;
        let h = cfg.boundary.h.build_real(&cx.cfg_dir)?;

        let u_norm = kgs_core::grid::sobolev_norm(&u0, cfg.regularity.s0);
        let wave_norm = kgs_core::grid::sobolev_norm(&n0, cfg.regularity.s1)
            + kgs_core::grid::sobolev_norm(&n1, cfg.regularity.s1 - 1.0);
        let t_window = cfg
            .time
            .t_window
            .unwrap_or_else(|| select_window(cfg.time.c_t, dt, u_norm, wave_norm));
        let steps = steps_of(t_window, dt);

        let u0_hat = forward(&u0);
        let g_series = (!cfg.boundary.g.is_zero()).then(|| window_series(&*g, t_window, dt));
        let h_complex = |t: f64| Complex64::new(h(t), 0.0);
        let h_series = (!cfg.boundary.h.is_zero()).then(|| window_series(&h_complex, t_window, dt));

        let prob = LocalProblem {
            grid,
            dt,
            t_window,
            u0_hat: u0_hat.clone(),
            phi: PhiPair::from_data(&n0, &n1),
            g: g_series.as_ref().map(BoundarySignal::sampled),
            h: h_series.as_ref().map(BoundarySignal::sampled),
            coupling_offset: None,
            wave_forcing: match cfg.data.wave_forcing {
                WaveForcingKind::Whole => kgs_core::duhamel::WaveForcing::Whole,
                WaveForcingKind::OddRestrict => kgs_core::duhamel::WaveForcing::OddRestrict,
            },
            kernel: rk.clone(),
            tol: cfg.picard.tol,
            max_iter: cfg.picard.max_iter,
            skip_rel: cfg.picard.skip_rel,
        };
        let sol = picard_solve(&prob);

        // Full linear part at the window end: free flow of the data plus the
        // boundary corrector driven by the damped trace mismatch.
        let lin_end = inverse(&schrodinger_flow_spec(&u0_hat, t_window));
        let window_times: Vec<f64> = (0..=2 * steps).map(|m| m as f64 * dt).collect();
        let psi_g = TimeSeries::from_fn(dt, 2 * steps + 1, |t| {
            let p = inverse(&schrodinger_flow_spec(&u0_hat, t)).value_at_origin();
            eta_scaled(t, t_window) * (g(t) - p)
        });
        let w0 = schrodinger_boundary_w0_field(
            &BoundarySignal::sampled(&psi_g),
            grid,
            &window_times,
            &rk,
        );

        let u_end = field_of_row(&sol.u, steps);
        let w0_end = field_of_row(&w0.u, steps);
        let remainder = u_end.sub(&lin_end).sub(&w0_end);

        let spec_lin = forward(&lin_end);
        let spec_rem = forward(&remainder);

        let lams = geomspace(
            cfg.smoothing.lambda_lo,
            cfg.smoothing.lambda_hi,
            cfg.smoothing.lambda_count,
        );
        let mut ln_lam = Vec::with_capacity(lams.len());
        let mut ln_lin = Vec::with_capacity(lams.len());
        let mut ln_rem = Vec::with_capacity(lams.len());
        let mut rows = Vec::with_capacity(lams.len());
        for &lam in &lams {
            let ml = spec_lin.tail_norm(lam, 0.0);
            let mr = spec_rem.tail_norm(lam, 0.0);
            if ml <= 0.0 || mr <= 0.0 {
                bail!("empty Fourier tail beyond {lam}; widen the data band or lower lambda_hi");
            }
            ln_lam.push(lam.ln());
            ln_lin.push(ml.ln());
            ln_rem.push(mr.ln());
            rows.push(format!("{},{},{}", lam, ml, mr));
        }
        let fit_lin = fit_line(&ln_lam, &ln_lin);
        let fit_rem = fit_line(&ln_lam, &ln_rem);
        let decay_lin = -fit_lin.slope;
        let decay_rem = -fit_rem.slope;
        let gap = decay_rem - decay_lin;

        let rem_fraction = remainder.restrict_halfline().sup_norm_halfline()
            / u_end.restrict_halfline().sup_norm_halfline().max(1e-300);

        cx.report.metric("t_window", t_window);
        cx.report.metric("tail_decay_linear", decay_lin);
        cx.report.metric("tail_decay_remainder", decay_rem);
        cx.report.metric("tail_slope_gap", gap);
        cx.report.metric("fit_resid_linear", fit_lin.max_resid);
        cx.report.metric("fit_resid_remainder", fit_rem.max_resid);
        // e^intercept is the fitted tail size extrapolated to lambda = 1; the
        // two levels make the raw separation of the curves easy to read off.
        cx.report.metric("tail_level_linear", fit_lin.intercept.exp());
        cx.report.metric("tail_level_remainder", fit_rem.intercept.exp());
        cx.report.metric("remainder_sup_fraction", rem_fraction);
        cx.report.metric_count("iterations", sol.diag.iterations);
        cx.report.metric("q_sup", sol.diag.q_sup);
        cx.report.metric("psi_g_sup", sol.diag.psi_g_sup);

        cx.report.check_ge(
            "tail_slope_gap",
            gap,
            cfg.regularity.a0 - cfg.tolerances.slope_gap_margin,
        );
        cx.report.check_le(
            "unconverged",
            if sol.diag.converged { 0.0 } else { 1.0 },
            0.0,
        );

        cx.csv("tails.csv", "lambda,tail_linear,tail_remainder", rows)?;
        Ok(())
    }
}
