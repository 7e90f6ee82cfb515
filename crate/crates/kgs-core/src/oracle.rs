//! Independent finite-difference solvers on a truncated half-line, used to
//! cross-check the spectral pipeline.  Nothing here shares code with the
//! spectral path: second-order centered differences in space, trapezoidal
//! (Crank-Nicolson) stepping in time, Dirichlet walls at both ends, and a
//! Strang splitting for the coupled system.
//!
//! The right wall stands in for infinity, so every run reports how much
//! field reached the outer fringe; comparisons are only meaningful while
//! that stays negligible.

use num_complex::Complex64;

/// Solve a tridiagonal system in place: `diag[i] x[i] + lower[i] x[i-1] +
/// upper[i] x[i+1] = rhs[i]` (lower[0] and upper[last] unused).  Complex
/// Thomas algorithm without pivoting; fine for the diagonally dominant
/// matrices stepping produces.
pub fn thomas_solve(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &mut [Complex64],
) {
    let n = diag.len();
    assert!(n >= 1 && lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut denom = diag[0];
    rhs[0] /= denom;
    for i in 1..n {
        scratch[i] = upper[i - 1] / denom;
        denom = diag[i] - lower[i] * scratch[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= scratch[i + 1] * next;
    }
}

/// Uniform grid x_i = i * dx on [0, x_max], walls at both ends.
#[derive(Debug, Clone, Copy)]
pub struct FdGrid {
    pub x_max: f64,
    pub cells: usize,
}

impl FdGrid {
    pub fn dx(&self) -> f64 {
        self.x_max / self.cells as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..=self.cells).map(|i| i as f64 * self.dx()).collect()
    }
}

/// Linear interpolation of tabulated values onto an arbitrary point inside
/// the table's range (clamped at the ends).
pub fn sample_linear(xs: &[f64], vals: &[Complex64], x: f64) -> Complex64 {
    let n = xs.len();
    if x <= xs[0] {
        return vals[0];
    }
    if x >= xs[n - 1] {
        return vals[n - 1];
    }
    let dx = xs[1] - xs[0];
    let fi = (x - xs[0]) / dx;
    let i = (fi.floor() as usize).min(n - 2);
    let w = fi - i as f64;
    vals[i] * (1.0 - w) + vals[i + 1] * w
}

fn edge_sup(values: &[Complex64], fringe: usize) -> f64 {
    values[values.len().saturating_sub(fringe)..]
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

/// One trapezoidal step of the free-particle flow with Dirichlet walls:
/// (I - i dt/2 dxx) u_new = (I + i dt/2 dxx) u_old, interior unknowns only.
fn schrodinger_cn_step(
    u: &mut [Complex64],
    dx: f64,
    dt: f64,
    g_old: Complex64,
    g_new: Complex64,
) {
    let n = u.len();
    let interior = n - 2;
    let r = Complex64::new(0.0, dt / (2.0 * dx * dx));
    let lower = vec![-r; interior];
    let upper = vec![-r; interior];
    let diag = vec![Complex64::new(1.0, 0.0) + 2.0 * r; interior];
    let mut rhs = vec![Complex64::new(0.0, 0.0); interior];
    for i in 0..interior {
        let j = i + 1;
        rhs[i] = (Complex64::new(1.0, 0.0) - 2.0 * r) * u[j] + r * (u[j - 1] + u[j + 1]);
    }
    rhs[0] += r * g_new;
    // Right wall is homogeneous; nothing to lift there.
    let _ = g_old; // already inside u[0] when the rhs was formed
    thomas_solve(&lower, &diag, &upper, &mut rhs);
    u[0] = g_new;
    for i in 0..interior {
        u[i + 1] = rhs[i];
    }
    u[n - 1] = Complex64::new(0.0, 0.0);
}

/// One trapezoidal step of n_tt + (1 - dxx) n = f as the first-order system
/// (n, v = n_t).  Eliminating v gives a real tridiagonal solve for n_new:
/// (I - dt^2/4 L) n_new = n + dt v + dt^2/4 L n + dt^2/2 fbar, L = dxx - 1.
#[allow(clippy::too_many_arguments)]
fn wave_cn_step(
    n_field: &mut [Complex64],
    v_field: &mut [Complex64],
    dx: f64,
    dt: f64,
    h_old: f64,
    h_new: f64,
    f_old: Option<&[f64]>,
    f_new: Option<&[f64]>,
) {
    let n = n_field.len();
    let interior = n - 2;
    let a = dt * dt / (4.0 * dx * dx);
    let c = dt * dt / 4.0;
    let lower = vec![Complex64::new(-a, 0.0); interior];
    let upper = vec![Complex64::new(-a, 0.0); interior];
    let diag = vec![Complex64::new(1.0 + 2.0 * a + c, 0.0); interior];
    let mut rhs = vec![Complex64::new(0.0, 0.0); interior];
    let lap = |w: &[Complex64], j: usize| (w[j - 1] - 2.0 * w[j] + w[j + 1]) / (dx * dx);
    for i in 0..interior {
        let j = i + 1;
        let l_old = lap(n_field, j) - n_field[j];
        let fbar = 0.5
            * (f_old.map_or(0.0, |f| f[j]) + f_new.map_or(0.0, |f| f[j]));
        rhs[i] = n_field[j]
            + dt * v_field[j]
            + (dt * dt / 4.0) * l_old
            + (dt * dt / 2.0) * fbar;
    }
    rhs[0] += Complex64::new(a * h_new, 0.0);
    let _ = h_old; // enters through the explicit L n term via n_field[0]
    thomas_solve(&lower, &diag, &upper, &mut rhs);
    let old: Vec<Complex64> = n_field.to_vec();
    n_field[0] = Complex64::new(h_new, 0.0);
    for i in 0..interior {
        n_field[i + 1] = rhs[i];
    }
    n_field[n - 1] = Complex64::new(0.0, 0.0);
    for j in 0..n {
        v_field[j] = 2.0 * (n_field[j] - old[j]) / dt - v_field[j];
    }
}

/// Recorded trajectory of a finite-difference run.
pub struct FdTrack {
    pub xs: Vec<f64>,
    pub times: Vec<f64>,
    /// Snapshot per recorded time, full wall-to-wall row.
    pub u: Vec<Vec<Complex64>>,
    pub n: Vec<Vec<Complex64>>,
    pub v: Vec<Vec<Complex64>>,
    /// Largest field magnitude seen in the outer 5% of the domain.
    pub edge_sup: f64,
}

/// Linear free-particle wall problem: data u0, trace g, zero potential.
pub fn fd_schrodinger_linear(
    grid: FdGrid,
    dt: f64,
    steps: usize,
    refine: usize,
    u0: impl Fn(f64) -> Complex64,
    g: impl Fn(f64) -> Complex64,
) -> FdTrack {
    let xs = grid.xs();
    let fringe = (xs.len() / 20).max(2);
    let mut u: Vec<Complex64> = xs.iter().map(|&x| u0(x)).collect();
    u[0] = g(0.0);
    *u.last_mut().unwrap() = Complex64::new(0.0, 0.0);
    let dt_sub = dt / refine as f64;
    let mut rows = vec![u.clone()];
    let mut times = vec![0.0];
    let mut edge: f64 = edge_sup(&u, fringe);
    for m in 0..steps {
        let t0 = m as f64 * dt;
        for s in 0..refine {
            let ta = t0 + s as f64 * dt_sub;
            schrodinger_cn_step(&mut u, grid.dx(), dt_sub, g(ta), g(ta + dt_sub));
        }
        edge = edge.max(edge_sup(&u, fringe));
        rows.push(u.clone());
        times.push(t0 + dt);
    }
    FdTrack {
        xs,
        times,
        u: rows,
        n: Vec::new(),
        v: Vec::new(),
        edge_sup: edge,
    }
}

/// Linear wave wall problem with optional prescribed forcing f(x, t).
#[allow(clippy::too_many_arguments)]
pub fn fd_kg_linear(
    grid: FdGrid,
    dt: f64,
    steps: usize,
    refine: usize,
    n0: impl Fn(f64) -> f64,
    n1: impl Fn(f64) -> f64,
    h: impl Fn(f64) -> f64,
    forcing: Option<&dyn Fn(f64, f64) -> f64>,
) -> FdTrack {
    let xs = grid.xs();
    let fringe = (xs.len() / 20).max(2);
    let mut nf: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(n0(x), 0.0)).collect();
    let mut vf: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(n1(x), 0.0)).collect();
    nf[0] = Complex64::new(h(0.0), 0.0);
    *nf.last_mut().unwrap() = Complex64::new(0.0, 0.0);
    let dt_sub = dt / refine as f64;
    let sample_f = |t: f64| -> Option<Vec<f64>> {
        forcing.map(|f| xs.iter().map(|&x| f(x, t)).collect())
    };
    let mut n_rows = vec![nf.clone()];
    let mut v_rows = vec![vf.clone()];
    let mut times = vec![0.0];
    let mut edge: f64 = edge_sup(&nf, fringe);
    for m in 0..steps {
        let t0 = m as f64 * dt;
        for s in 0..refine {
            let ta = t0 + s as f64 * dt_sub;
            let fa = sample_f(ta);
            let fb = sample_f(ta + dt_sub);
            wave_cn_step(
                &mut nf,
                &mut vf,
                grid.dx(),
                dt_sub,
                h(ta),
                h(ta + dt_sub),
                fa.as_deref(),
                fb.as_deref(),
            );
        }
        edge = edge.max(edge_sup(&nf, fringe));
        n_rows.push(nf.clone());
        v_rows.push(vf.clone());
        times.push(t0 + dt);
    }
    FdTrack {
        xs,
        times,
        u: Vec::new(),
        n: n_rows,
        v: v_rows,
        edge_sup: edge,
    }
}

/// Coupled wall problem by Strang splitting: half a linear step for each
/// equation, one full coupling step (phase rotation of u by n, kick of v by
/// |u|^2), then the other linear half step.
#[allow(clippy::too_many_arguments)]
pub fn fd_kgs_coupled(
    grid: FdGrid,
    dt: f64,
    steps: usize,
    refine: usize,
    u0: impl Fn(f64) -> Complex64,
    n0: impl Fn(f64) -> f64,
    n1: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> Complex64,
    h: impl Fn(f64) -> f64,
) -> FdTrack {
    let xs = grid.xs();
    let fringe = (xs.len() / 20).max(2);
    let mut u: Vec<Complex64> = xs.iter().map(|&x| u0(x)).collect();
    let mut nf: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(n0(x), 0.0)).collect();
    let mut vf: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(n1(x), 0.0)).collect();
    u[0] = g(0.0);
    *u.last_mut().unwrap() = Complex64::new(0.0, 0.0);
    nf[0] = Complex64::new(h(0.0), 0.0);
    *nf.last_mut().unwrap() = Complex64::new(0.0, 0.0);
    let dt_sub = dt / refine as f64;

    let mut u_rows = vec![u.clone()];
    let mut n_rows = vec![nf.clone()];
    let mut v_rows = vec![vf.clone()];
    let mut times = vec![0.0];
    let mut edge: f64 =
        edge_sup(&u, fringe).max(edge_sup(&nf, fringe));
    for m in 0..steps {
        let t0 = m as f64 * dt;
        for s in 0..refine {
            let ta = t0 + s as f64 * dt_sub;
            let tm = ta + 0.5 * dt_sub;
            let tb = ta + dt_sub;
            schrodinger_cn_step(&mut u, grid.dx(), 0.5 * dt_sub, g(ta), g(tm));
            wave_cn_step(
                &mut nf,
                &mut vf,
                grid.dx(),
                0.5 * dt_sub,
                h(ta),
                h(tm),
                None,
                None,
            );
            // Coupling: u picks up the potential phase, v the source kick.
            // |u| is unchanged by the rotation, so the order is immaterial.
            for j in 0..u.len() {
                u[j] *= Complex64::from_polar(1.0, nf[j].re * dt_sub);
                vf[j] += Complex64::new(dt_sub * u[j].norm_sqr(), 0.0);
            }
            schrodinger_cn_step(&mut u, grid.dx(), 0.5 * dt_sub, g(tm), g(tb));
            wave_cn_step(
                &mut nf,
                &mut vf,
                grid.dx(),
                0.5 * dt_sub,
                h(tm),
                h(tb),
                None,
                None,
            );
        }
        edge = edge
            .max(edge_sup(&u, fringe))
            .max(edge_sup(&nf, fringe));
        u_rows.push(u.clone());
        n_rows.push(nf.clone());
        v_rows.push(vf.clone());
        times.push(t0 + dt);
    }
    FdTrack {
        xs,
        times,
        u: u_rows,
        n: n_rows,
        v: v_rows,
        edge_sup: edge,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_dense_elimination() {
        let n = 9;
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let lower: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
        let upper: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
        let diag: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(next() + 6.0, next()))
            .collect();
        let rhs: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();

        // Dense Gaussian elimination on the same system.
        let mut a = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            a[i][i] = diag[i];
            if i > 0 {
                a[i][i - 1] = lower[i];
            }
            if i + 1 < n {
                a[i][i + 1] = upper[i];
            }
        }
        let mut b = rhs.clone();
        for col in 0..n {
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    let v = a[col][k];
                    a[row][k] -= f * v;
                }
                let bv = b[col];
                b[row] -= f * bv;
            }
        }
        for row in (0..n).rev() {
            for k in row + 1..n {
                let bv = b[k];
                b[row] -= a[row][k] * bv;
            }
            b[row] /= a[row][row];
        }

        let mut x = rhs;
        thomas_solve(&lower, &diag, &upper, &mut x);
        for i in 0..n {
            assert!((x[i] - b[i]).norm() < 1e-11, "i={i}: {} vs {}", x[i], b[i]);
        }
    }

    #[test]
    fn schrodinger_stepper_is_second_order_on_separable_mode() {
        // u = sin(k x) e^{-i k^2 t} solves the free equation with walls.
        // Coarse substeps keep the temporal error dominant over the O(dx^2)
        // phase drift, so halving dt must show the trapezoidal order.
        let grid = FdGrid {
            x_max: 10.0,
            cells: 800,
        };
        let k = 6.0 * std::f64::consts::PI / grid.x_max;
        let t_end = 0.25;
        let exact = |x: f64, t: f64| {
            Complex64::new((k * x).sin(), 0.0) * Complex64::from_polar(1.0, -k * k * t)
        };
        let err_at = |refine: usize| {
            let track = fd_schrodinger_linear(
                grid,
                t_end,
                1,
                refine,
                |x| exact(x, 0.0),
                |_| Complex64::new(0.0, 0.0),
            );
            track.xs
                .iter()
                .zip(track.u.last().unwrap())
                .map(|(&x, v)| (v - exact(x, t_end)).norm())
                .fold(0.0, f64::max)
        };
        let coarse = err_at(2);
        let fine = err_at(4);
        let order = (coarse / fine).log2();
        assert!(order > 1.7, "observed order {order} ({coarse} -> {fine})");
    }

    #[test]
    fn wave_stepper_is_second_order_on_separable_mode() {
        // n = sin(k x) cos(w t) with w^2 = 1 + k^2 solves the free equation.
        let grid = FdGrid {
            x_max: 10.0,
            cells: 800,
        };
        let k = 2.0 * std::f64::consts::PI / grid.x_max;
        let w = (1.0 + k * k).sqrt();
        let t_end = 0.5;
        let err_at = |refine: usize| {
            let track = fd_kg_linear(
                grid,
                t_end,
                1,
                refine,
                |x| (k * x).sin(),
                |_| 0.0,
                |_| 0.0,
                None,
            );
            track.xs
                .iter()
                .zip(track.n.last().unwrap())
                .map(|(&x, v)| (v.re - (k * x).sin() * (w * t_end).cos()).abs())
                .fold(0.0, f64::max)
        };
        let coarse = err_at(40);
        let fine = err_at(80);
        let order = (coarse / fine).log2();
        assert!(order > 1.7, "observed order {order} ({coarse} -> {fine})");
    }

    #[test]
    fn wave_forcing_term_is_consistent() {
        // Manufactured solution n = t^2 sin(k x): forcing f = n_tt + n - n_xx
        // = (2 + (1 + k^2) t^2) sin(k x).
        let grid = FdGrid {
            x_max: 10.0,
            cells: 600,
        };
        let k = 2.0 * std::f64::consts::PI / grid.x_max;
        let t_end = 0.4;
        let forcing = move |x: f64, t: f64| (2.0 + (1.0 + k * k) * t * t) * (k * x).sin();
        let track = fd_kg_linear(
            grid,
            t_end,
            1,
            160,
            |_| 0.0,
            |_| 0.0,
            |_| 0.0,
            Some(&forcing),
        );
        let err = track
            .xs
            .iter()
            .zip(track.n.last().unwrap())
            .map(|(&x, v)| (v.re - t_end * t_end * (k * x).sin()).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-5, "forced wave error {err}");
    }

    #[test]
    fn coupled_splitting_self_converges() {
        let grid = FdGrid {
            x_max: 12.0,
            cells: 600,
        };
        let u0 = |x: f64| Complex64::new(0.5 * (-((x - 4.0) / 1.2f64).powi(2)).exp(), 0.0);
        let n0 = |x: f64| 0.4 * (-((x - 5.0) / 1.5f64).powi(2)).exp();
        let zero_c = |_: f64| Complex64::new(0.0, 0.0);
        let zero_r = |_: f64| 0.0;
        let run = |refine: usize| {
            fd_kgs_coupled(
                grid, 0.3, 1, refine, u0, n0, zero_r, zero_c, zero_r,
            )
        };
        let a = run(30);
        let b = run(60);
        let c = run(120);
        let dist = |p: &FdTrack, q: &FdTrack| {
            p.u.last()
                .unwrap()
                .iter()
                .zip(q.u.last().unwrap())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max)
        };
        let d_ab = dist(&a, &b);
        let d_bc = dist(&b, &c);
        assert!(
            d_ab > 3.0 * d_bc,
            "splitting not converging: {d_ab} vs {d_bc}"
        );
        assert!(a.edge_sup < 1e-6, "outer fringe reached: {}", a.edge_sup);
    }

    #[test]
    fn interpolation_hits_grid_points_and_midpoints() {
        let xs: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let vals: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(2.0 * x, -x)).collect();
        assert!((sample_linear(&xs, &vals, 3.0) - Complex64::new(6.0, -3.0)).norm() < 1e-14);
        assert!((sample_linear(&xs, &vals, 2.5) - Complex64::new(5.0, -2.5)).norm() < 1e-14);
        assert!((sample_linear(&xs, &vals, -1.0) - vals[0]).norm() < 1e-14);
        assert!((sample_linear(&xs, &vals, 9.0) - vals[4]).norm() < 1e-14);
    }
}
