//! Boundary-driven linear dispersive check: the spectral boundary operator
//! against a Crank-Nicolson wall solve of the same problem.

use anyhow::{anyhow, Result};
use kgs_core::boundary::{schrodinger_boundary_w0_field, BoundarySignal};
use kgs_core::oracle::{fd_schrodinger_linear, FdGrid};
use num_complex::Complex64;

use super::{
    damped_series, dense_times, resolve_grid, rel_l2_vs_oracle, row_halfline_sup, steps_of,
    Experiment, RunContext,
};

pub struct LinearSchrodingerCheck;

impl Experiment for LinearSchrodingerCheck {
    fn name(&self) -> &'static str {
        "linear-schrodinger-check"
    }


    fn run(&self, cx: &mut RunContext) -> Result<()> {
        let cfg = cx.cfg;
        let grid = resolve_grid(cfg);
        let rk = cfg.kernel.to_core().resolve(grid).map_err(|e| anyhow!("{e}"))?;
        let dt = cfg.time.dt;
        let t_final = cfg.time.t_final;
        let steps = steps_of(t_final, dt);

        let g = cfg.boundary.g.build_complex(&cx.cfg_dir)?;
        let signal = damped_series(&*g, t_final, dt);
        let times = dense_times(t_final, dt);
        let w0 = schrodinger_boundary_w0_field(&BoundarySignal::sampled(&signal), grid, &times, &rk);

        let x_wall = cfg.fd.x_max.unwrap_or(grid.l());
        let fdg = FdGrid {
            x_max: x_wall,
            cells: cfg.fd.cells,
        };
        let track = fd_schrodinger_linear(
            fdg,
            dt,
            steps,
            cfg.fd.refine,
            |_| Complex64::new(0.0, 0.0),
            |t| g(t),
        );

        let x_cut = cfg.fd.x_cut.unwrap_or(0.9 * grid.l().min(x_wall));
        let rel = rel_l2_vs_oracle(&w0.u, &track.xs, &track.u, x_cut);

        let g_sup = (0..=steps)
            .map(|m| g(m as f64 * dt).norm())
            .fold(0.0, f64::max);
        let o = grid.origin_index();
        let trace_err = (0..=steps)
            .map(|m| (w0.u.row(m)[o] - g(m as f64 * dt)).norm())
            .fold(0.0, f64::max);
        let t0_sup = row_halfline_sup(&w0.u, 0);

        cx.report.metric("rel_l2_vs_oracle", rel);
        cx.report.metric("drive_sup", g_sup);
        cx.report.metric("trace_err", trace_err);
        cx.report.metric("t0_field_sup", t0_sup);
        cx.report.metric("raw_t0", w0.raw_t0);
        cx.report.metric("oracle_edge_sup", track.edge_sup);

        cx.report.check_le("rel_l2_vs_oracle", rel, cfg.tolerances.rel_l2);
        cx.report
            .check_le("trace_err", trace_err, cfg.tolerances.trace_frac * g_sup);
        cx.report.check_le("t0_field_sup", t0_sup, cfg.tolerances.t0);

        cx.csv(
            "trace.csv",
            "t,drive_re,drive_im,trace_re,trace_im,abs_err",
            (0..=steps).map(|m| {
                let t = m as f64 * dt;
                let gv = g(t);
                let tr = w0.u.row(m)[o];
                format!(
                    "{},{},{},{},{},{}",
                    t,
                    gv.re,
                    gv.im,
                    tr.re,
                    tr.im,
                    (tr - gv).norm()
                )
            }),
        )?;
        cx.csv(
            "final_profile.csv",
            "x,spectral_re,spectral_im,oracle_re,oracle_im",
            (0..grid.n() / 2).map(|j| {
                let x = grid.x(o + j);
                let s = w0.u.row(steps)[o + j];
                let f = kgs_core::oracle::sample_linear(&track.xs, &track.u[steps], x);
                format!("{},{},{},{},{}", x, s.re, s.im, f.re, f.im)
            }),
        )?;
        Ok(())
    }
}
