//! Boundary-driven linear wave check: the spectral boundary operator against
//! a wall-clamped finite-difference solve of the same problem.

use anyhow::{anyhow, Result};
use kgs_core::boundary::{kg_boundary_v0_field, BoundarySignal};
use kgs_core::oracle::{fd_kg_linear, FdGrid};

use super::{
    damped_series, dense_times, resolve_grid, rel_l2_vs_oracle, row_halfline_sup, steps_of,
    Experiment, RunContext,
};

pub struct LinearKgCheck;

impl Experiment for LinearKgCheck {
    fn name(&self) -> &'static str {
        "linear-kg-check"
    }


    fn run(&self, cx: &mut RunContext) -> Result<()> {
        let cfg = cx.cfg;
        let grid = resolve_grid(cfg);
        let rk = cfg.kernel.to_core().resolve(grid).map_err(|e| anyhow!("{e}"))?;
        let dt = cfg.time.dt;
        let t_final = cfg.time.t_final;
        let steps = steps_of(t_final, dt);

        let h = cfg.boundary.h.build_real(&cx.cfg_dir)?;
        let h_complex = |t: f64| num_complex::Complex64::new(h(t), 0.0);
        let signal = damped_series(&h_complex, t_final, dt);
        let times = dense_times(t_final, dt);
        let v0 = kg_boundary_v0_field(&BoundarySignal::sampled(&signal), grid, &times, &rk);

        let x_wall = cfg.fd.x_max.unwrap_or(grid.l());
        let fdg = FdGrid {
            x_max: x_wall,
            cells: cfg.fd.cells,
        };
        let track = fd_kg_linear(
            fdg,
            dt,
            steps,
            cfg.fd.refine,
            |_| 0.0,
            |_| 0.0,
            |t| h(t),
            None,
        );

        let x_cut = cfg.fd.x_cut.unwrap_or(0.9 * grid.l().min(x_wall));
        let rel = rel_l2_vs_oracle(&v0.n, &track.xs, &track.n, x_cut);

        let h_sup = (0..=steps)
            .map(|m| h(m as f64 * dt).abs())
            .fold(0.0, f64::max);
        let o = grid.origin_index();
        let trace_err = (0..=steps)
            .map(|m| (v0.n.row(m)[o].re - h(m as f64 * dt)).abs())
            .fold(0.0, f64::max);
        let t0_sup = row_halfline_sup(&v0.n, 0);

        cx.report.metric("rel_l2_vs_oracle", rel);
        cx.report.metric("drive_sup", h_sup);
        cx.report.metric("trace_err", trace_err);
        cx.report.metric("t0_field_sup", t0_sup);
        cx.report.metric("t0_deriv_sup", row_halfline_sup(&v0.nt, 0));
        cx.report.metric("imag_residue", v0.imag_residue);
        cx.report.metric("raw_t0_value", v0.raw_t0_value);
        cx.report.metric("oracle_edge_sup", track.edge_sup);

        cx.report.check_le("rel_l2_vs_oracle", rel, cfg.tolerances.rel_l2);
        cx.report
            .check_le("trace_err", trace_err, cfg.tolerances.trace_frac * h_sup);
        cx.report.check_le("t0_field_sup", t0_sup, cfg.tolerances.t0);

        cx.csv(
            "trace.csv",
            "t,drive,trace,abs_err",
            (0..=steps).map(|m| {
                let t = m as f64 * dt;
                let tr = v0.n.row(m)[o].re;
                format!("{},{},{},{}", t, h(t), tr, (tr - h(t)).abs())
            }),
        )?;
        cx.csv(
            "final_profile.csv",
            "x,spectral,oracle",
            (0..grid.n() / 2).map(|j| {
                let x = grid.x(o + j);
                let s = v0.n.row(steps)[o + j].re;
                let f = kgs_core::oracle::sample_linear(&track.xs, &track.n[steps], x).re;
                format!("{},{},{}", x, s, f)
            }),
        )?;
        Ok(())
    }
}
