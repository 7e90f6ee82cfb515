//! Dual-route checks: the spectral pipeline against the finite-difference
//! wall solvers, on the physical region where both see the same problem.

use kgs_core::boundary::{kg_boundary_v0_field, BoundarySignal, KernelConfig};
use kgs_core::cutoff::eta_scaled;
use kgs_core::duhamel::{picard_solve, LocalProblem, WaveForcing};
use kgs_core::flows::PhiPair;
use kgs_core::grid::{forward, Field, SpatialGrid};
use kgs_core::halfline::TimeSeries;
use kgs_core::oracle::{
    fd_kg_linear, fd_kgs_coupled, fd_schrodinger_linear, sample_linear, FdGrid,
};
use kgs_core::solver::{solve_global, GlobalProblem};
use num_complex::Complex64;

const L: f64 = 15.0;

/// Compare a spectral row against an FD row on x in [0, x_cut]: relative
/// sup distance, normalized by the sup of the reference.
fn rel_sup_on_halfline(
    grid: SpatialGrid,
    spectral_row: &[Complex64],
    fd_xs: &[f64],
    fd_row: &[Complex64],
    x_cut: f64,
) -> f64 {
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for j in grid.origin_index()..grid.n() {
        let x = grid.x(j);
        if x > x_cut {
            break;
        }
        let fd = sample_linear(fd_xs, fd_row, x);
        err = err.max((spectral_row[j] - fd).norm());
        scale = scale.max(fd.norm());
    }
    err / scale.max(1e-300)
}

#[test]
fn boundary_driven_schrodinger_matches_fd_wall_solver() {
    // Pure boundary forcing: zero data, compatible complex trace signal.
    let grid = SpatialGrid::new(L, 256);
    let dt: f64 = 2e-3;
    let t_window: f64 = 0.25;
    let g_fn = |t: f64| {
        Complex64::from_polar(0.3, -4.0 * t) * (1.0 - (-25.0 * t * t).exp())
    };

    let steps = (2.0 * t_window / dt).round() as usize;
    let g_series = TimeSeries {
        dt,
        values: (0..=steps).map(|m| g_fn(m as f64 * dt)).collect(),
    };
    let prob = LocalProblem {
        grid,
        dt,
        t_window,
        u0_hat: forward(&Field::zeros(grid)),
        phi: PhiPair::from_data(&Field::zeros(grid), &Field::zeros(grid)),
        g: Some(BoundarySignal::sampled(&g_series)),
        h: None,
        coupling_offset: None,
        wave_forcing: WaveForcing::Whole,
        kernel: KernelConfig::default().resolve(grid).unwrap(),
        tol: 1e-11,
        max_iter: 25,
        skip_rel: 1e-9,
    };
    let sol = picard_solve(&prob);
    assert!(sol.diag.converged);

    let fd = fd_schrodinger_linear(
        FdGrid {
            x_max: L,
            cells: 3000,
        },
        t_window,
        1,
        1000,
        |_| Complex64::new(0.0, 0.0),
        g_fn,
    );
    // Infinite propagation speed: the turn-on's fast tail touches the wall
    // immediately, but reflections of this size stay far below the budget.
    assert!(fd.edge_sup < 1e-4, "fd fringe {}", fd.edge_sup);

    let mi = prob.plateau_index();
    let rel = rel_sup_on_halfline(grid, sol.u.row(mi), &fd.xs, fd.u.last().unwrap(), 12.0);
    assert!(rel < 5e-2, "boundary-driven mismatch {rel}");
}

#[test]
fn boundary_driven_wave_matches_fd_wall_solver() {
    let grid = SpatialGrid::new(L, 256);
    let dt: f64 = 2e-3;
    let t_max: f64 = 0.4;
    let h_fn = |t: f64| 0.4 * (6.0 * t).sin() * (1.0 - (-8.0 * t * t).exp());

    // Damped one-sided signal, field evaluated over [0, t_max].
    let steps = (2.0 * t_max / dt).round() as usize;
    let series = TimeSeries {
        dt,
        values: (0..=steps)
            .map(|m| {
                let t = m as f64 * dt;
                Complex64::new(eta_scaled(t, t_max) * h_fn(t), 0.0)
            })
            .collect(),
    };
    let times: Vec<f64> = (0..=(t_max / dt).round() as usize)
        .map(|m| m as f64 * dt)
        .collect();
    let rk = KernelConfig::default().resolve(grid).unwrap();
    let out = kg_boundary_v0_field(&BoundarySignal::sampled(&series), grid, &times, &rk);

    let fd = fd_kg_linear(
        FdGrid {
            x_max: L,
            cells: 3000,
        },
        t_max,
        1,
        2000,
        |_| 0.0,
        |_| 0.0,
        h_fn,
        None,
    );
    assert!(fd.edge_sup < 1e-8);

    let last = times.len() - 1;
    let rel = rel_sup_on_halfline(grid, out.n.row(last), &fd.xs, fd.n.last().unwrap(), 12.0);
    assert!(rel < 5e-2, "wave boundary mismatch {rel}");
}

fn bump(x0: f64, sigma: f64, amp: f64) -> impl Fn(f64) -> f64 + Copy {
    move |x: f64| amp * (-((x - x0) / sigma).powi(2)).exp()
}

fn odd_field(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Field {
    Field::from_fn(grid, |x| Complex64::new(f(x) - f(-x), 0.0))
}

#[test]
fn coupled_system_matches_strang_oracle() {
    let grid = SpatialGrid::new(L, 256);
    let dt = 2.5e-3;
    let t_final = 0.3;
    let u_bump = bump(5.0, 1.0, 0.4);
    let n_bump = bump(4.0, 1.2, 0.3);

    let mut prob = GlobalProblem::new(
        grid,
        dt,
        t_final,
        odd_field(grid, u_bump),
        odd_field(grid, n_bump),
        Field::zeros(grid),
    );
    prob.capture_fields = true;
    let sol = solve_global(&prob).unwrap();
    for r in &sol.window_reports {
        assert!(r.converged);
    }

    let steps = (t_final / dt).round() as usize;
    let fd = fd_kgs_coupled(
        FdGrid {
            x_max: L,
            cells: 2400,
        },
        dt,
        steps,
        8,
        |x| Complex64::new(u_bump(x), 0.0),
        n_bump,
        |_| 0.0,
        |_| Complex64::new(0.0, 0.0),
        |_| 0.0,
    );
    assert!(fd.edge_sup < 1e-7, "fd fringe {}", fd.edge_sup);

    // Compare the dense capture against the oracle at mid and final time.
    let ud = sol.u_dense.as_ref().unwrap();
    let nd = sol.n_dense.as_ref().unwrap();
    for &frac in &[0.5, 1.0] {
        let gi = ((steps as f64) * frac).round() as usize;
        let rel_u = rel_sup_on_halfline(grid, ud.row(gi), &fd.xs, &fd.u[gi], 12.0);
        let rel_n = rel_sup_on_halfline(grid, nd.row(gi), &fd.xs, &fd.n[gi], 12.0);
        assert!(rel_u < 5e-2, "u mismatch at step {gi}: {rel_u}");
        assert!(rel_n < 5e-2, "n mismatch at step {gi}: {rel_n}");
    }

    // Half-line mass of u is conserved under the homogeneous trace.
    let drift = kgs_core::solver::relative_drift(&sol.l2_u_halfline);
    assert!(drift < 5e-3, "mass drift {drift}");
}

#[test]
fn interior_data_solution_is_extension_independent() {
    // For data supported away from the wall, the half-line solution must not
    // care how the data was extended to the left of it.
    let grid = SpatialGrid::new(L, 256);
    let dt = 2.5e-3;
    let t_final = 0.15;
    let u_bump = bump(6.0, 0.9, 0.35);
    let n_bump = bump(5.0, 1.1, 0.25);

    let run = |u0: Field, n0: Field| {
        let mut prob = GlobalProblem::new(grid, dt, t_final, u0, n0, Field::zeros(grid));
        prob.capture_fields = true;
        solve_global(&prob).unwrap()
    };

    // Odd extensions.
    let sol_odd = run(odd_field(grid, u_bump), odd_field(grid, n_bump));
    // Zero extension for u, odd for the wave (the wave restart demands odd).
    let sol_zero = run(
        Field::from_fn(grid, |x| {
            Complex64::new(if x >= 0.0 { u_bump(x) } else { 0.0 }, 0.0)
        }),
        odd_field(grid, n_bump),
    );

    let ua = sol_odd.u_dense.as_ref().unwrap();
    let ub = sol_zero.u_dense.as_ref().unwrap();
    let last = ua.snapshots() - 1;
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for j in grid.origin_index()..grid.n() {
        err = err.max((ua.row(last)[j] - ub.row(last)[j]).norm());
        scale = scale.max(ua.row(last)[j].norm());
    }
    assert!(
        err < 1e-3 * scale,
        "extension dependence {err} (scale {scale})"
    );
}
