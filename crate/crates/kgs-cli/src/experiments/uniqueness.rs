//! Extension-independence twins: the same half-line problem solved with odd
//! and with zero wave-data extensions must agree on the physical domain.

use anyhow::{anyhow, Result};
use kgs_core::boundary::BoundarySignal;
use kgs_core::duhamel::{picard_solve, LocalProblem, LocalSolution, WaveForcing};
use kgs_core::flows::PhiPair;
use kgs_core::grid::{forward, sobolev_norm, Field};
use num_complex::Complex64;

use super::{resolve_grid, select_window, steps_of, window_series, Experiment, RunContext};
use crate::config::ExtensionKind;

pub struct UniquenessCheck;

impl Experiment for UniquenessCheck {
    fn name(&self) -> &'static str {
        "uniqueness-check"
    }


    fn run(&self, cx: &mut RunContext) -> Result<()> {
        let cfg = cx.cfg;
        let grid = resolve_grid(cfg);
        let rk = cfg.kernel.to_core().resolve(grid).map_err(|e| anyhow!("{e}"))?;
        let dt = cfg.time.dt;

        let u0 = cfg.data.u0.build(grid, cfg.seed, &cx.cfg_dir)?;
        let n0_odd = cfg
            .data
            .n0
            .with_extension(ExtensionKind::Odd)?
            .build(grid, cfg.seed, &cx.cfg_dir)?;
        let n1_odd = cfg
            .data
            .n1
            .with_extension(ExtensionKind::Odd)?
            .build(grid, cfg.seed, &cx.cfg_dir)?;
        let n0_zero = cfg
            .data
            .n0
            .with_extension(ExtensionKind::Zero)?
            .build(grid, cfg.seed, &cx.cfg_dir)?;
        let n1_zero = cfg
            .data
            .n1
            .with_extension(ExtensionKind::Zero)?
            .build(grid, cfg.seed, &cx.cfg_dir)?;
        let g = cfg.boundary.g.build_complex(&cx.cfg_dir)?;
        let h = cfg.boundary.h.build_real(&cx.cfg_dir)?;

        // One window length for both twins: the more conservative of the two
        // data sizes, so both runs sit inside the contraction regime.
        let u_norm = sobolev_norm(&u0, cfg.regularity.s0);
        let wave_norm = (sobolev_norm(&n0_odd, cfg.regularity.s1)
            + sobolev_norm(&n1_odd, cfg.regularity.s1 - 1.0))
        .max(
            sobolev_norm(&n0_zero, cfg.regularity.s1)
                + sobolev_norm(&n1_zero, cfg.regularity.s1 - 1.0),
        );
        let t_window = cfg
            .time
            .t_window
            .unwrap_or_else(|| select_window(cfg.time.c_t, dt, u_norm, wave_norm));
        let steps = steps_of(t_window, dt);

        let g_series = (!cfg.boundary.g.is_zero()).then(|| window_series(&*g, t_window, dt));
        let h_complex = |t: f64| Complex64::new(h(t), 0.0);
        let h_series = (!cfg.boundary.h.is_zero()).then(|| window_series(&h_complex, t_window, dt));

        let solve = |n0: &Field, n1: &Field, forcing: WaveForcing| -> LocalSolution {
            let prob = LocalProblem {
                grid,
                dt,
                t_window,
                u0_hat: forward(&u0),
                phi: PhiPair::from_data(n0, n1),
                g: g_series.as_ref().map(BoundarySignal::sampled),
                h: h_series.as_ref().map(BoundarySignal::sampled),
                coupling_offset: None,
                wave_forcing: forcing,
                kernel: rk.clone(),
                tol: cfg.picard.tol,
                max_iter: cfg.picard.max_iter,
                skip_rel: cfg.picard.skip_rel,
            };
            picard_solve(&prob)
        };

        // The odd twin keeps the coupling odd, so its trace corrections
        // vanish; the zero twin runs the general path with every boundary
        // operator live.  Agreement on the half line is the point.
        let sol_odd = solve(&n0_odd, &n1_odd, WaveForcing::OddRestrict);
        let sol_zero = solve(&n0_zero, &n1_zero, WaveForcing::Whole);

        let o = grid.origin_index();
        let half = grid.n() / 2;
        let mut sup_u: f64 = 0.0;
        let mut sup_n: f64 = 0.0;
        let mut scale_u: f64 = 0.0;
        let mut scale_n: f64 = 0.0;
        let mut rows = Vec::with_capacity(steps + 1);
        for m in 0..=steps {
            let (au, bu) = (sol_odd.u.row(m), sol_zero.u.row(m));
            let (an, bn) = (sol_odd.n.row(m), sol_zero.n.row(m));
            let mut du: f64 = 0.0;
            let mut dn: f64 = 0.0;
            for j in 0..half {
                du = du.max((au[o + j] - bu[o + j]).norm());
                dn = dn.max((an[o + j] - bn[o + j]).norm());
                scale_u = scale_u.max(au[o + j].norm());
                scale_n = scale_n.max(an[o + j].norm());
            }
            sup_u = sup_u.max(du);
            sup_n = sup_n.max(dn);
            rows.push(format!("{},{},{}", m as f64 * dt, du, dn));
        }
        let rel_u = sup_u / scale_u.max(1e-300);
        let rel_n = sup_n / scale_n.max(1e-300);

        cx.report.metric("t_window", t_window);
        cx.report.metric("twin_disagreement_u", rel_u);
        cx.report.metric("twin_disagreement_n", rel_n);
        cx.report.metric("scale_u", scale_u);
        cx.report.metric("scale_n", scale_n);
        cx.report
            .metric_count("iterations_odd", sol_odd.diag.iterations);
        cx.report
            .metric_count("iterations_zero", sol_zero.diag.iterations);
        cx.report
            .metric("z_sup_zero_twin", sol_zero.diag.z_sup);
        cx.report.metric_flag(
            "odd_twin_skipped_wave_trace_ops",
            sol_odd.diag.skip.v0_trace_calls == 0,
        );

        cx.report
            .check_le("twin_disagreement_u", rel_u, cfg.tolerances.ext_agree);
        cx.report
            .check_le("twin_disagreement_n", rel_n, cfg.tolerances.ext_agree);
        cx.report.check_le(
            "unconverged",
            if sol_odd.diag.converged && sol_zero.diag.converged {
                0.0
            } else {
                1.0
            },
            0.0,
        );

        cx.csv("twin_disagreement.csv", "t,sup_du,sup_dn", rows)?;
        Ok(())
    }
}
