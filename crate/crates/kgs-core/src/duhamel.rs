//! Forced-evolution integrals and the contraction map solving the coupled
//! problem on one time window.
//!
//! The window problem is solved as a fixed point of a map built from four
//! kinds of terms: free flows of the (extended) initial data, boundary
//! kernels correcting the x = 0 traces, forced-evolution integrals of the
//! couplings, and boundary kernels cancelling the traces those integrals
//! introduce.  Every term is time-localized by the smooth window cutoff so
//! the internal span [0, 2T] ends at exact zero signal, which keeps the
//! one-sided transforms of internally generated boundary signals clean.
//!
//! Forced-evolution integrals are computed by per-mode prefix sums: peeling
//! the flow phase off each frequency turns the time integral into a running
//! trapezoid sum, giving the whole trajectory in O(snapshots x modes) plus
//! one FFT pair per snapshot.
//!
//! The wave unknown is carried in half-wave components n -+ i D^{-1} n_t,
//! which evolve by scalar phases and make the boundary corrections one
//! multiplier application away from the wave kernel's (value, derivative)
//! output.

use crate::boundary::{
    kg_boundary_v0_field, schrodinger_boundary_w0_field, BoundarySignal, ResolvedKernel,
};
use crate::cutoff::eta_scaled;
use crate::flows::{half_wave_symbol, schrodinger_flow_spec, PhiPair};
use crate::grid::{forward, inverse, signum_plus, SpatialGrid, SpectralField};
use crate::halfline::TimeSeries;
use crate::spacetime::SpaceTimeField;
use num_complex::Complex64;
use rayon::prelude::*;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn assert_uniform_dt(times: &[f64]) -> f64 {
    assert!(times.len() >= 2);
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        assert!(
            ((w[1] - w[0]) - dt).abs() < 1e-9 * dt.max(1e-12),
            "snapshots must be uniformly spaced"
        );
    }
    dt
}

/// Forced-evolution integral for a flow with mode phases exp(i omega(xi) t):
/// out(t_m) = int_0^{t_m} flow(t_m - s) f(s) ds, by per-mode prefix sums.
fn duhamel_with_phase(f: &SpaceTimeField, omega: impl Fn(f64) -> f64 + Sync) -> SpaceTimeField {
    let grid = f.grid;
    let n = grid.n();
    let m = f.snapshots();
    let dt = assert_uniform_dt(&f.times);
    let omegas: Vec<f64> = grid.xis().iter().map(|&xi| omega(xi)).collect();

    let specs: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|j| forward(&f.field_at(j)).coeffs)
        .collect();

    // Running trapezoid of exp(-i omega s) f_hat(s) per mode.
    let mut out_specs = vec![vec![Complex64::new(0.0, 0.0); n]; m];
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    let mut prev: Vec<Complex64> = (0..n)
        .map(|k| specs[0][k] * Complex64::from_polar(1.0, -omegas[k] * f.times[0]))
        .collect();
    for j in 1..m {
        let row = &specs[j];
        let out = &mut out_specs[j];
        for k in 0..n {
            let phase = Complex64::from_polar(1.0, -omegas[k] * f.times[j]);
            let cur = row[k] * phase;
            acc[k] += (0.5 * dt) * (prev[k] + cur);
            // Re-attach the flow phase at the observation time.
            out[k] = acc[k] * phase.conj();
            prev[k] = cur;
        }
    }

    let mut result = SpaceTimeField::zeros(grid, f.times.clone());
    result
        .data
        .par_chunks_mut(n)
        .zip(out_specs.par_iter())
        .for_each(|(row, spec)| {
            let field = inverse(&SpectralField {
                grid,
                coeffs: spec.clone(),
            });
            row.copy_from_slice(&field.values);
        });
    result
}

/// int_0^t e^{i (t-s) Laplacian} f(s) ds.
pub fn schrodinger_duhamel(f: &SpaceTimeField) -> SpaceTimeField {
    duhamel_with_phase(f, |xi| -xi * xi)
}

/// int_0^t e^{+- i (t-s) D} f(s) ds for the half-wave phases.
pub fn half_wave_duhamel(f: &SpaceTimeField, plus: bool) -> SpaceTimeField {
    if plus {
        duhamel_with_phase(f, half_wave_symbol)
    } else {
        duhamel_with_phase(f, |xi| -half_wave_symbol(xi))
    }
}

/// Apply a frequency multiplier to every snapshot.
pub fn apply_multiplier_rows(
    f: &SpaceTimeField,
    m: impl Fn(f64) -> Complex64 + Sync,
) -> SpaceTimeField {
    let grid = f.grid;
    let n = grid.n();
    let mut out = SpaceTimeField::zeros(grid, f.times.clone());
    out.data
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(j, row)| {
            let spec = forward(&f.field_at(j)).apply_multiplier(&m);
            let field = inverse(&spec);
            row.copy_from_slice(&field.values);
        });
    out
}

/// Restrict a snapshot to x >= 0 and extend oddly; used for the wave forcing
/// in the whole-horizon scheme, where it pins the forced field's boundary
/// trace to zero by symmetry.
pub fn odd_restrict_rows(f: &SpaceTimeField) -> SpaceTimeField {
    let grid = f.grid;
    let n = grid.n();
    let o = grid.origin_index();
    let mut out = SpaceTimeField::zeros(grid, f.times.clone());
    out.data
        .par_chunks_mut(n)
        .zip(f.data.par_chunks(n))
        .for_each(|(row, src)| {
            for j in (o + 1)..n {
                row[j] = src[j];
                row[grid.mirror(j)] = -src[j];
            }
            row[o] = Complex64::new(0.0, 0.0);
            row[0] = Complex64::new(0.0, 0.0);
        });
    out
}

/// How the wave forcing |u|^2 enters the window problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveForcing {
    /// Use the product on the whole line as computed.
    Whole,
    /// Restrict to x >= 0 and extend oddly (whole-horizon stepping).
    OddRestrict,
}

/// One window of the coupled problem, with all data already extended to the
/// whole line.  Boundary signals are in window-local time on the window's
/// own step; `None` means an identically zero signal.
pub struct LocalProblem<'a> {
    pub grid: SpatialGrid,
    pub dt: f64,
    /// Plateau length T; the internal span is [0, 2T].
    pub t_window: f64,
    pub u0_hat: SpectralField,
    pub phi: PhiPair,
    pub g: Option<BoundarySignal<'a>>,
    pub h: Option<BoundarySignal<'a>>,
    /// External wave field added to n in the Schrodinger coupling (the
    /// boundary-driven part split off in the whole-horizon scheme).
    pub coupling_offset: Option<&'a SpaceTimeField>,
    pub wave_forcing: WaveForcing,
    pub kernel: ResolvedKernel,
    /// Residual target, relative to the problem scale.
    pub tol: f64,
    pub max_iter: usize,
    /// Boundary-op skip threshold, relative to the problem scale.
    pub skip_rel: f64,
}

impl<'a> LocalProblem<'a> {
    pub fn window_times(&self) -> Vec<f64> {
        let span = 2.0 * self.t_window;
        let steps = (span / self.dt).round() as usize;
        assert!(
            (steps as f64 * self.dt - span).abs() < 1e-9,
            "window span must sit on the time step"
        );
        (0..=steps).map(|m| m as f64 * self.dt).collect()
    }

    /// Index of the plateau end T in the window times.
    pub fn plateau_index(&self) -> usize {
        (self.t_window / self.dt).round() as usize
    }
}

/// Which boundary operators were skipped because their driving signal sat
/// below the skip threshold.
#[derive(Debug, Clone, Default)]
pub struct SkipLog {
    pub w0_data_skipped: bool,
    pub v0_data_skipped: bool,
    pub w0_trace_calls: usize,
    pub w0_trace_skips: usize,
    pub v0_trace_calls: usize,
    pub v0_trace_skips: usize,
}

#[derive(Debug, Clone)]
pub struct PicardDiagnostics {
    /// Sup-norm change per iteration (first entry: size of the data part).
    pub residuals: Vec<f64>,
    /// Successive residual quotients, residuals[i] / residuals[i-1].
    pub ratios: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Problem scale used for relative thresholds.
    pub scale: f64,
    /// Imaginary mass dropped when projecting the wave output real.
    pub imag_residue_n: f64,
    pub skip: SkipLog,
    pub p_sup: f64,
    pub r_sup: f64,
    pub psi_g_sup: f64,
    pub psi_h_sup: f64,
    pub q_sup: f64,
    pub z_sup: f64,
}

/// Converged window solution on the internal span [0, 2T].  Fields are the
/// map's own unknowns: `n` excludes any `coupling_offset`.  Valid as the
/// window solution on [0, T]; the (T, 2T] part is the damped internal tail.
pub struct LocalSolution {
    pub u: SpaceTimeField,
    pub n: SpaceTimeField,
    pub nt: SpaceTimeField,
    pub q: TimeSeries,
    pub z: TimeSeries,
    pub diag: PicardDiagnostics,
}

/// Iterate state: the Schrodinger unknown and the two half-wave components.
#[derive(Clone)]
struct GammaState {
    u: SpaceTimeField,
    np: SpaceTimeField,
    nm: SpaceTimeField,
}

impl GammaState {
    fn zeros(grid: SpatialGrid, times: &[f64]) -> Self {
        GammaState {
            u: SpaceTimeField::zeros(grid, times.to_vec()),
            np: SpaceTimeField::zeros(grid, times.to_vec()),
            nm: SpaceTimeField::zeros(grid, times.to_vec()),
        }
    }

    fn sup_distance(&self, other: &GammaState) -> f64 {
        let mut sup: f64 = 0.0;
        for (a, b) in [
            (&self.u, &other.u),
            (&self.np, &other.np),
            (&self.nm, &other.nm),
        ] {
            for (x, y) in a.data.iter().zip(&b.data) {
                sup = sup.max((x - y).norm());
            }
        }
        sup
    }
}

/// Precomputed data terms of the window map.
struct GammaContext<'a, 'b> {
    prob: &'b LocalProblem<'a>,
    times: Vec<f64>,
    eta: Vec<f64>,
    lin_u: SpaceTimeField,
    w0_data: Option<SpaceTimeField>,
    lin_np: SpaceTimeField,
    lin_nm: SpaceTimeField,
    v0_data: Option<(SpaceTimeField, SpaceTimeField)>,
    scale: f64,
    skip: SkipLog,
    p_sup: f64,
    r_sup: f64,
    psi_g_sup: f64,
    psi_h_sup: f64,
    imag_kernel_residue: f64,
    q_sup: f64,
    z_sup: f64,
}

/// Half-wave lift of a (value, derivative) wave pair: value +- i D^{-1} deriv.
fn half_wave_pair(v: &SpaceTimeField, vt: &SpaceTimeField) -> (SpaceTimeField, SpaceTimeField) {
    let lift = apply_multiplier_rows(vt, |xi| {
        Complex64::new(0.0, signum_plus(xi) / (1.0 + xi * xi).sqrt())
    });
    let mut plus = v.clone();
    plus.add_assign(&lift);
    let mut minus = v.clone();
    minus.sub_assign(&lift);
    (plus, minus)
}

fn signal_values(sig: &Option<BoundarySignal>, steps: usize, dt: f64) -> Vec<Complex64> {
    match sig {
        None => vec![Complex64::new(0.0, 0.0); steps],
        Some(s) => {
            assert!(
                (s.series.dt - dt).abs() < 1e-12 * dt,
                "boundary signal must be sampled on the window step"
            );
            assert!(
                s.series.values.len() >= steps,
                "boundary signal must cover the window"
            );
            s.series.values[..steps].to_vec()
        }
    }
}

impl<'a, 'b> GammaContext<'a, 'b> {
    fn new(prob: &'b LocalProblem<'a>) -> Self {
        let grid = prob.grid;
        let times = prob.window_times();
        let steps = times.len();
        let eta: Vec<f64> = times
            .iter()
            .map(|&t| eta_scaled(t, prob.t_window))
            .collect();

        // Free Schrodinger flow of the extended data and its trace.
        let mut lin_u = SpaceTimeField::zeros(grid, times.clone());
        let n = grid.n();
        lin_u
            .data
            .par_chunks_mut(n)
            .zip(times.par_iter())
            .for_each(|(row, &t)| {
                let f = inverse(&schrodinger_flow_spec(&prob.u0_hat, t));
                row.copy_from_slice(&f.values);
            });
        let p: Vec<Complex64> = lin_u.origin_trace();
        let p_sup = p.iter().map(|v| v.norm()).fold(0.0, f64::max);

        // Free half-wave flows and the wave trace.
        let mut lin_np = SpaceTimeField::zeros(grid, times.clone());
        let mut lin_nm = SpaceTimeField::zeros(grid, times.clone());
        lin_np
            .data
            .par_chunks_mut(n)
            .zip(lin_nm.data.par_chunks_mut(n))
            .zip(times.par_iter())
            .for_each(|((rp, rm), &t)| {
                let fp = inverse(&crate::flows::half_wave_flow_spec(&prob.phi.plus, t, true));
                let fm = inverse(&crate::flows::half_wave_flow_spec(&prob.phi.minus, t, false));
                rp.copy_from_slice(&fp.values);
                rm.copy_from_slice(&fm.values);
            });
        let r: Vec<Complex64> = lin_np
            .origin_trace()
            .iter()
            .zip(lin_nm.origin_trace().iter())
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let r_sup = r.iter().map(|v| v.norm()).fold(0.0, f64::max);

        // Problem scale: data, signals, and coupling offset.
        let u0_sup = inverse(&prob.u0_hat).sup_norm();
        let (n0s, n1s) = prob.phi.to_data();
        let wave_sup = inverse(&n0s).sup_norm().max(inverse(&n1s).sup_norm());
        let g_sup = prob.g.as_ref().map_or(0.0, |s| s.sup_norm());
        let h_sup = prob.h.as_ref().map_or(0.0, |s| s.sup_norm());
        let off_sup = prob.coupling_offset.map_or(0.0, |f| f.sup_norm());
        let scale = u0_sup
            .max(wave_sup)
            .max(g_sup)
            .max(h_sup)
            .max(off_sup)
            .max(1e-30);

        let mut skip = SkipLog::default();
        let mut imag_kernel_residue: f64 = 0.0;

        // Trace correction for u: signal eta (g - p).
        let g_vals = signal_values(&prob.g, steps, prob.dt);
        let psi_g: Vec<Complex64> = (0..steps)
            .map(|m| eta[m] * (g_vals[m] - p[m]))
            .collect();
        let psi_g_sup = psi_g.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let w0_data = if psi_g_sup > prob.skip_rel * scale {
            let series = TimeSeries {
                dt: prob.dt,
                values: psi_g,
            };
            let sig = BoundarySignal::sampled(&series);
            let out = schrodinger_boundary_w0_field(&sig, grid, &times, &prob.kernel);
            Some(out.u)
        } else {
            skip.w0_data_skipped = true;
            None
        };

        // Trace correction for the wave: signal eta (h - r), lifted to the
        // half-wave components.
        let h_vals = signal_values(&prob.h, steps, prob.dt);
        let psi_h: Vec<Complex64> = (0..steps)
            .map(|m| eta[m] * (h_vals[m] - r[m]))
            .collect();
        let psi_h_sup = psi_h.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let v0_data = if psi_h_sup > prob.skip_rel * scale {
            let series = TimeSeries {
                dt: prob.dt,
                values: psi_h,
            };
            let sig = BoundarySignal::sampled(&series);
            let out = kg_boundary_v0_field(&sig, grid, &times, &prob.kernel);
            imag_kernel_residue = imag_kernel_residue.max(out.imag_residue);
            Some(half_wave_pair(&out.n, &out.nt))
        } else {
            skip.v0_data_skipped = true;
            None
        };

        GammaContext {
            prob,
            times,
            eta,
            lin_u,
            w0_data,
            lin_np,
            lin_nm,
            v0_data,
            scale,
            skip,
            p_sup,
            r_sup,
            psi_g_sup,
            psi_h_sup,
            imag_kernel_residue,
            q_sup: 0.0,
            z_sup: 0.0,
        }
    }

    /// One application of the window map to the current iterate.
    fn apply(&mut self, state: &GammaState) -> (GammaState, TimeSeries, TimeSeries) {
        let grid = self.prob.grid;
        let n = grid.n();
        let steps = self.times.len();
        let dt = self.prob.dt;

        // Coupling F = eta (n + offset) u from the current iterate.
        let mut coupling = SpaceTimeField::zeros(grid, self.times.clone());
        coupling
            .data
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(m, row)| {
                let np = state.np.row(m);
                let nm = state.nm.row(m);
                let u = state.u.row(m);
                let off = self.prob.coupling_offset.map(|f| f.row(m));
                let e = self.eta[m];
                for j in 0..n {
                    let mut nv = 0.5 * (np[j] + nm[j]);
                    if let Some(o) = off {
                        nv += o[j];
                    }
                    row[j] = e * nv * u[j];
                }
            });

        let duh_u = schrodinger_duhamel(&coupling);
        let q_vals: Vec<Complex64> = duh_u
            .origin_trace()
            .iter()
            .enumerate()
            .map(|(m, v)| self.eta[m] * v)
            .collect();
        let q_sup = q_vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        self.q_sup = q_sup;
        let q_series = TimeSeries {
            dt,
            values: q_vals,
        };
        let w0_q = if q_sup > self.prob.skip_rel * self.scale {
            self.skip.w0_trace_calls += 1;
            let sig = BoundarySignal::sampled(&q_series);
            Some(schrodinger_boundary_w0_field(&sig, grid, &self.times, &self.prob.kernel).u)
        } else {
            self.skip.w0_trace_skips += 1;
            None
        };

        // u update: eta [flow + data correction + i duhamel - i trace fix].
        let mut u_new = SpaceTimeField::zeros(grid, self.times.clone());
        u_new
            .data
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(m, row)| {
                let e = self.eta[m];
                let lin = self.lin_u.row(m);
                let duh = duh_u.row(m);
                let wg = self.w0_data.as_ref().map(|f| f.row(m));
                let wq = w0_q.as_ref().map(|f| f.row(m));
                for j in 0..n {
                    let mut v = lin[j] + I * duh[j];
                    if let Some(w) = wg {
                        v += w[j];
                    }
                    if let Some(w) = wq {
                        v -= I * w[j];
                    }
                    row[j] = e * v;
                }
            });

        // Wave forcing from the current iterate, optionally odd-restricted,
        // then lifted through D^{-1} and time-localized.
        let mut forcing = SpaceTimeField::zeros(grid, self.times.clone());
        forcing
            .data
            .par_chunks_mut(n)
            .zip(state.u.data.par_chunks(n))
            .for_each(|(row, u)| {
                for j in 0..n {
                    row[j] = Complex64::new(u[j].norm_sqr(), 0.0);
                }
            });
        if self.prob.wave_forcing == WaveForcing::OddRestrict {
            forcing = odd_restrict_rows(&forcing);
        }
        let mut g_field = apply_multiplier_rows(&forcing, |xi| {
            Complex64::new(signum_plus(xi) / (1.0 + xi * xi).sqrt(), 0.0)
        });
        for (m, chunk) in g_field.data.chunks_mut(n).enumerate() {
            let e = self.eta[m];
            for v in chunk.iter_mut() {
                *v *= e;
            }
        }

        // Forced half-waves: -+ i int e^{+- i (t-s) D} G ds.
        let mut npf = half_wave_duhamel(&g_field, true);
        npf.scale_assign(-I);
        let mut nmf = half_wave_duhamel(&g_field, false);
        nmf.scale_assign(I);

        let z_vals: Vec<Complex64> = npf
            .origin_trace()
            .iter()
            .zip(nmf.origin_trace().iter())
            .enumerate()
            .map(|(m, (a, b))| self.eta[m] * (a + b))
            .collect();
        let z_imag = z_vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        self.imag_kernel_residue = self.imag_kernel_residue.max(z_imag);
        let z_series = TimeSeries {
            dt,
            values: z_vals.iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
        };
        let z_sup = z_series.sup_norm();
        self.z_sup = z_sup;
        let v0_z = if z_sup > self.prob.skip_rel * self.scale {
            self.skip.v0_trace_calls += 1;
            let sig = BoundarySignal::sampled(&z_series);
            let out = kg_boundary_v0_field(&sig, grid, &self.times, &self.prob.kernel);
            self.imag_kernel_residue = self.imag_kernel_residue.max(out.imag_residue);
            Some(half_wave_pair(&out.n, &out.nt))
        } else {
            self.skip.v0_trace_skips += 1;
            None
        };

        // Half-wave updates.
        let mut np_new = SpaceTimeField::zeros(grid, self.times.clone());
        let mut nm_new = SpaceTimeField::zeros(grid, self.times.clone());
        for m in 0..steps {
            let e = self.eta[m];
            for (out, lin, fcd, data, zfix) in [
                (
                    np_new.row_mut(m),
                    self.lin_np.row(m),
                    npf.row(m),
                    self.v0_data.as_ref().map(|(p, _)| p.row(m)),
                    v0_z.as_ref().map(|(p, _)| p.row(m)),
                ),
                (
                    nm_new.row_mut(m),
                    self.lin_nm.row(m),
                    nmf.row(m),
                    self.v0_data.as_ref().map(|(_, q)| q.row(m)),
                    v0_z.as_ref().map(|(_, q)| q.row(m)),
                ),
            ] {
                for j in 0..out.len() {
                    let mut v = lin[j] + fcd[j];
                    if let Some(d) = data {
                        v += d[j];
                    }
                    if let Some(z) = zfix {
                        v -= 0.5 * z[j];
                    }
                    out[j] = e * v;
                }
            }
        }

        (
            GammaState {
                u: u_new,
                np: np_new,
                nm: nm_new,
            },
            q_series,
            z_series,
        )
    }
}

/// Solve one window problem by Picard iteration of the window map.
pub fn picard_solve(prob: &LocalProblem) -> LocalSolution {
    let grid = prob.grid;
    let mut ctx = GammaContext::new(prob);
    let times = ctx.times.clone();

    let mut state = GammaState::zeros(grid, &times);
    let mut residuals = Vec::new();
    let mut q = TimeSeries {
        dt: prob.dt,
        values: vec![Complex64::new(0.0, 0.0); times.len()],
    };
    let mut z = q.clone();
    let mut converged = false;
    for _ in 0..prob.max_iter {
        let (next, q_new, z_new) = ctx.apply(&state);
        let res = next.sup_distance(&state);
        residuals.push(res);
        state = next;
        q = q_new;
        z = z_new;
        if res <= prob.tol * ctx.scale {
            converged = true;
            break;
        }
    }

    let ratios: Vec<f64> = residuals
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();

    // Physical wave value and derivative from the half-wave components.
    let mut n_field = state.np.clone();
    n_field.add_assign(&state.nm);
    n_field.scale_assign(Complex64::new(0.5, 0.0));
    let mut diff = state.np.clone();
    diff.sub_assign(&state.nm);
    let mut nt_field = apply_multiplier_rows(&diff, |xi| {
        Complex64::new(0.0, 0.5 * signum_plus(xi) * (1.0 + xi * xi).sqrt())
    });

    let imag_n = n_field.project_real().max(nt_field.project_real());

    let iterations = residuals.len();
    let diag = PicardDiagnostics {
        residuals,
        ratios,
        iterations,
        converged,
        scale: ctx.scale,
        imag_residue_n: imag_n.max(ctx.imag_kernel_residue),
        skip: ctx.skip.clone(),
        p_sup: ctx.p_sup,
        r_sup: ctx.r_sup,
        psi_g_sup: ctx.psi_g_sup,
        psi_h_sup: ctx.psi_h_sup,
        q_sup: ctx.q_sup,
        z_sup: ctx.z_sup,
    };

    LocalSolution {
        u: state.u,
        n: n_field,
        nt: nt_field,
        q,
        z,
        diag,
    }
}
