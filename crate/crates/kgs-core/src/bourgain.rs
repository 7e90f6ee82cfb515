//! Space-time norms with dispersion-adapted weights, and a randomized
//! harness measuring how the coupling terms' norm ratios behave as the
//! resolution grows.
//!
//! The weights live on the lattice dual to a rectangle [-L, L] x [-S, S]:
//! the time axis reuses the spatial grid machinery (same transform
//! conventions, same FFT layout), so a space-time transform is one spatial
//! pass followed by one temporal pass.  Free flows concentrate on their
//! dispersion curves - tau = -xi^2 for the free-particle flow, tau = +-D(xi)
//! for the half-wave flows - so each weight measures distance to its curve;
//! the wave field itself carries both half-wave components, measured with
//! the harmonic-mean combination of the two one-sided weights.
//!
//! The randomized harness draws band-limited data with prescribed-regularity
//! spectra, pushes it through the same forced-evolution integrals the
//! contraction map uses, and reports the ratio (output norm) / (product of
//! input norms) per resolution.  Bounded ratios across resolutions back the
//! contraction's resolution-independent smallness constants.

use crate::cutoff::eta_scaled;
use crate::duhamel::{apply_multiplier_rows, half_wave_duhamel, schrodinger_duhamel};
use crate::flows::{half_wave_flow_spec, half_wave_symbol, schrodinger_flow_spec};
use crate::grid::{
    forward, inverse, japanese_bracket, signum_plus, sobolev_norm, Field, SpatialGrid,
    SpectralField,
};
use crate::spacetime::SpaceTimeField;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Symmetric time axis t in [-S, S) sampled like a spatial grid, so the
/// temporal transform inherits the spatial conventions verbatim.
pub type TimeAxis = SpatialGrid;

/// Full 2-D transform of a space-time field sampled on `time.xs()`:
/// rows are transformed in space, then every spatial mode in time.
/// Layout matches the input: entry [m * N + k] holds (tau_m, xi_k) in FFT
/// order on both axes.
pub fn spacetime_transform(f: &SpaceTimeField, time: TimeAxis) -> Vec<Complex64> {
    let n = f.grid.n();
    let mt = time.n();
    assert_eq!(f.snapshots(), mt, "field must be sampled on the time axis");

    let rows: Vec<Vec<Complex64>> = (0..mt)
        .into_par_iter()
        .map(|m| forward(&f.field_at(m)).coeffs)
        .collect();

    let mut out = vec![Complex64::new(0.0, 0.0); mt * n];
    let cols: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let col = Field {
                grid: time,
                values: (0..mt).map(|m| rows[m][k]).collect(),
            };
            forward(&col).coeffs
        })
        .collect();
    for m in 0..mt {
        for k in 0..n {
            out[m * n + k] = cols[k][m];
        }
    }
    out
}

/// Dispersion-adapted weight families.
#[derive(Debug, Clone, Copy)]
pub enum SpaceTimeWeight {
    /// <xi>^s <tau + xi^2>^b : adapted to the free-particle flow.
    Schrodinger { s: f64, b: f64 },
    /// <xi>^s <tau - D(xi)>^b : adapted to the forward half-wave.
    WavePlus { s: f64, b: f64 },
    /// <xi>^s <tau + D(xi)>^b : adapted to the backward half-wave.
    WaveMinus { s: f64, b: f64 },
    /// Harmonic-mean combination of the two one-sided wave weights; finite
    /// for fields carrying both half-wave components.
    WaveBoth { s: f64, b: f64 },
}

impl SpaceTimeWeight {
    pub fn eval(&self, xi: f64, tau: f64) -> f64 {
        match *self {
            SpaceTimeWeight::Schrodinger { s, b } => {
                japanese_bracket(xi).powf(s) * japanese_bracket(tau + xi * xi).powf(b)
            }
            SpaceTimeWeight::WavePlus { s, b } => {
                japanese_bracket(xi).powf(s)
                    * japanese_bracket(tau - half_wave_symbol(xi)).powf(b)
            }
            SpaceTimeWeight::WaveMinus { s, b } => {
                japanese_bracket(xi).powf(s)
                    * japanese_bracket(tau + half_wave_symbol(xi)).powf(b)
            }
            SpaceTimeWeight::WaveBoth { s, b } => {
                let wp = SpaceTimeWeight::WavePlus { s, b }.eval(xi, tau);
                let wm = SpaceTimeWeight::WaveMinus { s, b }.eval(xi, tau);
                (wp.powi(-2) + wm.powi(-2)).powf(-0.5)
            }
        }
    }
}

/// Weighted L2 norm over the dual lattice; with a unit weight this is the
/// space-time L2 norm by the discrete Plancherel identity.
pub fn spacetime_norm(f: &SpaceTimeField, time: TimeAxis, w: &SpaceTimeWeight) -> f64 {
    let coeffs = spacetime_transform(f, time);
    let n = f.grid.n();
    let dxi = std::f64::consts::PI / f.grid.l();
    let dtau = std::f64::consts::PI / time.l();
    let cell = dxi * dtau / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
    // Per-row partials are collected in index order and reduced serially so
    // the floating-point total does not depend on the work-stealing schedule.
    let partials: Vec<f64> = (0..time.n())
        .into_par_iter()
        .map(|m| {
            let tau = time.xi(m);
            let mut acc = 0.0;
            for k in 0..n {
                let weight = w.eval(f.grid.xi(k), tau);
                acc += (weight * coeffs[m * n + k].norm()).powi(2);
            }
            acc
        })
        .collect();
    let sum: f64 = partials.iter().sum();
    (cell * sum).sqrt()
}

/// Random data with a prescribed-regularity spectrum: independent complex
/// Gaussians shaped by <xi>^{-s - 1/2 - margin} over the grid band, then
/// normalized to unit Sobolev norm.
pub fn random_sobolev_field(grid: SpatialGrid, s: f64, rng: &mut ChaCha8Rng) -> Field {
    let mut spec = SpectralField::zeros(grid);
    for k in 0..grid.n() {
        let xi = grid.xi(k);
        let decay = japanese_bracket(xi).powf(-s - 0.51);
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        spec.coeffs[k] = decay * Complex64::new(re, im);
    }
    let field = inverse(&spec);
    let norm = sobolev_norm(&field, s);
    field.scale(Complex64::new(1.0 / norm.max(1e-300), 0.0))
}

/// Time-localized free-particle flow eta(t/S') e^{i t Laplacian} phi on the
/// symmetric axis, with the cutoff scaled to vanish at the axis ends.
fn localized_schrodinger_flow(phi: &Field, time: TimeAxis) -> SpaceTimeField {
    let spec = forward(phi);
    let times = time.xs();
    let half = 0.5 * time.l();
    let mut out = SpaceTimeField::zeros(phi.grid, times.clone());
    let n = phi.grid.n();
    out.data
        .par_chunks_mut(n)
        .zip(times.par_iter())
        .for_each(|(row, &t)| {
            let f = inverse(&schrodinger_flow_spec(&spec, t));
            let e = eta_scaled(t, half);
            for (dst, src) in row.iter_mut().zip(&f.values) {
                *dst = e * src;
            }
        });
    out
}

fn localized_wave_pair(
    psi_p: &Field,
    psi_m: &Field,
    time: TimeAxis,
) -> SpaceTimeField {
    let sp = forward(psi_p);
    let sm = forward(psi_m);
    let times = time.xs();
    let half = 0.5 * time.l();
    let mut out = SpaceTimeField::zeros(psi_p.grid, times.clone());
    let n = psi_p.grid.n();
    out.data
        .par_chunks_mut(n)
        .zip(times.par_iter())
        .for_each(|(row, &t)| {
            let fp = inverse(&half_wave_flow_spec(&sp, t, true));
            let fm = inverse(&half_wave_flow_spec(&sm, t, false));
            let e = eta_scaled(t, half);
            for j in 0..n {
                row[j] = e * 0.5 * (fp.values[j] + fm.values[j]);
            }
        });
    out
}

fn localize_rows(f: &mut SpaceTimeField, time: TimeAxis) {
    let half = 0.5 * time.l();
    let n = f.grid.n();
    let times = f.times.clone();
    for (m, chunk) in f.data.chunks_mut(n).enumerate() {
        let e = eta_scaled(times[m], half);
        for v in chunk.iter_mut() {
            *v *= e;
        }
    }
}

/// Configuration of the randomized estimate harness.
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub l: f64,
    /// Half-length of the symmetric time axis.
    pub t_span: f64,
    /// Temporal samples; must resolve the largest xi^2 in the band.
    pub time_steps: usize,
    pub sizes: Vec<usize>,
    pub seeds: usize,
    pub base_seed: u64,
    pub s0: f64,
    pub s1: f64,
    pub b: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            l: 15.0,
            t_span: 0.5,
            time_steps: 768,
            sizes: vec![64, 128, 256],
            seeds: 50,
            base_seed: 0x6b67_7331,
            s0: 0.25,
            s1: 0.25,
            b: 0.4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimateStats {
    pub size: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

/// Least-squares slope of log(max ratio) against log(size).
pub fn fitted_slope(stats: &[EstimateStats]) -> f64 {
    assert!(stats.len() >= 2);
    let xs: Vec<f64> = stats.iter().map(|s| (s.size as f64).ln()).collect();
    let ys: Vec<f64> = stats.iter().map(|s| s.max_ratio.ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let den: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    num / den
}

impl EnsembleConfig {
    fn time_axis(&self) -> TimeAxis {
        TimeAxis::new(self.t_span, self.time_steps)
    }

    fn check_band(&self, grid: SpatialGrid, time: TimeAxis) {
        // The fastest phase in the band must stay inside the temporal band,
        // or the concentration weights alias.
        let fastest = grid.max_frequency().powi(2);
        assert!(
            fastest <= time.max_frequency(),
            "time axis too coarse: xi_max^2 = {fastest:.1} exceeds tau_max = {:.1}",
            time.max_frequency()
        );
    }
}

/// Ratio of the coupling-into-Schrodinger term against its input norms for
/// one random draw.
fn bilinear_ratio_once(cfg: &EnsembleConfig, grid: SpatialGrid, time: TimeAxis, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = random_sobolev_field(grid, cfg.s0, &mut rng);
    let psi_p = random_sobolev_field(grid, cfg.s1, &mut rng);
    let psi_m = random_sobolev_field(grid, cfg.s1, &mut rng);

    let u = localized_schrodinger_flow(&phi, time);
    let nf = localized_wave_pair(&psi_p, &psi_m, time);

    let mut coupling = SpaceTimeField::zeros(grid, u.times.clone());
    let n = grid.n();
    for m in 0..u.snapshots() {
        let row = coupling.row_mut(m);
        let ur = u.row(m);
        let nr = nf.row(m);
        for j in 0..n {
            row[j] = ur[j] * nr[j];
        }
    }
    let mut out = schrodinger_duhamel(&coupling);
    localize_rows(&mut out, time);

    let x_weight = SpaceTimeWeight::Schrodinger {
        s: cfg.s0,
        b: cfg.b,
    };
    let y_weight = SpaceTimeWeight::WaveBoth {
        s: cfg.s1,
        b: cfg.b,
    };
    let lhs = spacetime_norm(&out, time, &x_weight);
    let rhs = spacetime_norm(&u, time, &x_weight) * spacetime_norm(&nf, time, &y_weight);
    lhs / rhs.max(1e-300)
}

/// Ratio of the quadratic-into-wave term against its input norm for one
/// random draw.
fn wave_ratio_once(cfg: &EnsembleConfig, grid: SpatialGrid, time: TimeAxis, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = random_sobolev_field(grid, cfg.s0, &mut rng);
    let u = localized_schrodinger_flow(&phi, time);

    let n = grid.n();
    let mut sq = SpaceTimeField::zeros(grid, u.times.clone());
    for m in 0..u.snapshots() {
        let row = sq.row_mut(m);
        let ur = u.row(m);
        for j in 0..n {
            row[j] = Complex64::new(ur[j].norm_sqr(), 0.0);
        }
    }
    let g = apply_multiplier_rows(&sq, |xi| {
        Complex64::new(signum_plus(xi) / (1.0 + xi * xi).sqrt(), 0.0)
    });

    let x_weight = SpaceTimeWeight::Schrodinger {
        s: cfg.s0,
        b: cfg.b,
    };
    let rhs = spacetime_norm(&u, time, &x_weight).powi(2);

    let mut worst = 0.0f64;
    for plus in [true, false] {
        let mut out = half_wave_duhamel(&g, plus);
        localize_rows(&mut out, time);
        let w = if plus {
            SpaceTimeWeight::WavePlus {
                s: cfg.s1,
                b: cfg.b,
            }
        } else {
            SpaceTimeWeight::WaveMinus {
                s: cfg.s1,
                b: cfg.b,
            }
        };
        let lhs = spacetime_norm(&out, time, &w);
        worst = worst.max(lhs / rhs.max(1e-300));
    }
    worst
}

fn sweep(
    cfg: &EnsembleConfig,
    ratio: impl Fn(&EnsembleConfig, SpatialGrid, TimeAxis, u64) -> f64 + Sync,
) -> Vec<EstimateStats> {
    let time = cfg.time_axis();
    cfg.sizes
        .iter()
        .map(|&size| {
            let grid = SpatialGrid::new(cfg.l, size);
            cfg.check_band(grid, time);
            let ratios: Vec<f64> = (0..cfg.seeds)
                .into_par_iter()
                .map(|i| ratio(cfg, grid, time, cfg.base_seed.wrapping_add(i as u64)))
                .collect();
            let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
            let mean_ratio = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
            EstimateStats {
                size,
                max_ratio,
                mean_ratio,
            }
        })
        .collect()
}

/// Coupling-into-Schrodinger ratios across resolutions.
pub fn bilinear_schrodinger_ratios(cfg: &EnsembleConfig) -> Vec<EstimateStats> {
    sweep(cfg, bilinear_ratio_once)
}

/// Quadratic-into-wave ratios across resolutions.
pub fn wave_coupling_ratios(cfg: &EnsembleConfig) -> Vec<EstimateStats> {
    sweep(cfg, wave_ratio_once)
}
