//! Symmetric spatial grid on [-L, L] and the discrete Fourier calculus on it.
//!
//! The torus [-L, L] acts as a surrogate for the whole line: half-line data
//! is extended to [-L, 0] and the far ends are kept quiet by construction.
//! Transforms approximate the continuum pair
//!
//! ```text
//!   fhat(xi) = integral e^{-i x xi} f(x) dx        (approximated by dx * sum)
//!   f(x)     = (1/2pi) integral e^{i x xi} fhat(xi) dxi
//! ```
//!
//! on the frequency comb xi_k = pi k / L, k = -N/2 .. N/2 - 1. Spectral data
//! is stored in FFT order (index k holds frequency pi*k/L for k < N/2 and
//! pi*(k-N)/L above), so index N/2 carries the negative Nyquist frequency.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::sync::{Arc, Mutex, OnceLock};

/// Uniform grid x_j = -L + j * dx, j = 0..N-1, with dx = 2L/N.
///
/// N must be even so that x_{N/2} = 0 is a grid node; the origin node is
/// where half-line data meets its extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    l: f64,
    n: usize,
}

impl SpatialGrid {
    /// Creates a grid; panics unless `n` is even, at least 4, and `l > 0`.
    pub fn new(l: f64, n: usize) -> Self {
        assert!(l > 0.0, "grid half-length must be positive");
        assert!(n >= 4 && n % 2 == 0, "grid size must be even and >= 4");
        SpatialGrid { l, n }
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    /// Physical coordinate of node `j`.
    pub fn x(&self, j: usize) -> f64 {
        -self.l + j as f64 * self.dx()
    }

    /// Index of the origin node x = 0.
    pub fn origin_index(&self) -> usize {
        self.n / 2
    }

    /// Frequency carried by spectral storage slot `k` (FFT order).
    pub fn xi(&self, k: usize) -> f64 {
        let half = self.n / 2;
        let signed = if k < half {
            k as isize
        } else {
            k as isize - self.n as isize
        };
        std::f64::consts::PI * signed as f64 / self.l
    }

    /// Largest frequency magnitude representable on the grid, pi N / (2L).
    pub fn max_frequency(&self) -> f64 {
        std::f64::consts::PI * (self.n as f64 / 2.0) / self.l
    }

    /// Mirror node of `j` under x -> -x (the ends x = -L and x = L coincide).
    pub fn mirror(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.xi(k)).collect()
    }
}

/// Physical-space samples on a [`SpatialGrid`].
#[derive(Debug, Clone)]
pub struct Field {
    pub grid: SpatialGrid,
    pub values: Vec<Complex64>,
}

/// Spectral coefficients in FFT storage order; slot k approximates fhat(xi_k).
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub grid: SpatialGrid,
    pub coeffs: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: SpatialGrid) -> Self {
        Field {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    /// Samples a scalar function on the grid.
    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> Complex64) -> Self {
        Field {
            grid,
            values: (0..grid.n()).map(|j| f(grid.x(j))).collect(),
        }
    }

    pub fn value_at_origin(&self) -> Complex64 {
        self.values[self.grid.origin_index()]
    }

    /// Trapezoid L^2 norm over the full grid (periodic, so plain dx * sum).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.grid.dx()).sqrt()
    }

    /// L^2 norm restricted to x >= 0, trapezoid weights on [0, L].
    ///
    /// The x = L sample lives at the wrapped node j = 0.
    pub fn l2_norm_halfline(&self) -> f64 {
        let n = self.grid.n();
        let o = self.grid.origin_index();
        let mut s = 0.5 * self.values[o].norm_sqr();
        for j in o + 1..n {
            s += self.values[j].norm_sqr();
        }
        s += 0.5 * self.values[0].norm_sqr();
        (s * self.grid.dx()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sup over the physical half-line x >= 0 only.
    pub fn sup_norm_halfline(&self) -> f64 {
        self.values[self.grid.origin_index()..]
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Zero out everything at x < 0, keeping the half-line part.
    pub fn restrict_halfline(&self) -> Field {
        let mut out = self.clone();
        for v in out.values[..self.grid.origin_index()].iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        out
    }

    /// Largest imaginary magnitude, as a realness diagnostic.
    pub fn imag_sup(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Even part (f(x) + f(-x)) / 2 under the grid mirror involution.
    pub fn even_part(&self) -> Field {
        let n = self.grid.n();
        let values = (0..n)
            .map(|j| 0.5 * (self.values[j] + self.values[self.grid.mirror(j)]))
            .collect();
        Field {
            grid: self.grid,
            values,
        }
    }

    /// Odd part (f(x) - f(-x)) / 2 under the grid mirror involution.
    pub fn odd_part(&self) -> Field {
        let n = self.grid.n();
        let values = (0..n)
            .map(|j| 0.5 * (self.values[j] - self.values[self.grid.mirror(j)]))
            .collect();
        Field {
            grid: self.grid,
            values,
        }
    }

    pub fn scale(&self, c: Complex64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Pointwise product a(x) b(x).
    pub fn mul_pointwise(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// Pointwise |f|^2 as a (real-valued) complex field.
    pub fn abs2(&self) -> Field {
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(v.norm_sqr(), 0.0))
                .collect(),
        }
    }

    /// Fraction of the |f|^2 mass lying within `cells` nodes of the ends +-L.
    ///
    /// The torus surrogate is only trustworthy while this stays negligible.
    pub fn edge_mass_fraction(&self, cells: usize) -> f64 {
        let n = self.grid.n();
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0;
        for j in 0..n {
            let dist = j.min(n - j);
            if dist <= cells {
                edge += self.values[j].norm_sqr();
            }
        }
        edge / total
    }
}

/// sqrt(1 + xi^2), the weight underlying every Sobolev norm here.
pub fn japanese_bracket(xi: f64) -> f64 {
    (1.0 + xi * xi).sqrt()
}

/// sgn(xi) with the convention sgn(0) = 1, so the half-wave symbol never
/// vanishes and D^{-1} stays bounded.
pub fn signum_plus(xi: f64) -> f64 {
    if xi < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn fft_planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(n: usize, forward: bool) -> Arc<dyn rustfft::Fft<f64>> {
    let mut planner = fft_planner().lock().unwrap();
    if forward {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    }
}

/// Forward transform: slot k of the result approximates fhat(xi_k).
///
/// The (-1)^k twiddle accounts for the grid starting at x = -L rather than 0.
pub fn forward(field: &Field) -> SpectralField {
    let n = field.grid.n();
    let mut buf = field.values.clone();
    plan(n, true).process(&mut buf);
    let dx = field.grid.dx();
    for (k, v) in buf.iter_mut().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *v *= sign * dx;
    }
    SpectralField {
        grid: field.grid,
        coeffs: buf,
    }
}

/// Inverse transform; exact round trip with [`forward`] up to rounding.
pub fn inverse(spec: &SpectralField) -> Field {
    let n = spec.grid.n();
    let mut buf: Vec<Complex64> = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 0 { *v } else { -*v })
        .collect();
    plan(n, false).process(&mut buf);
    let scale = 1.0 / (2.0 * spec.grid.l());
    for v in buf.iter_mut() {
        *v *= scale;
    }
    Field {
        grid: spec.grid,
        values: buf,
    }
}

impl SpectralField {
    pub fn zeros(grid: SpatialGrid) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    /// Applies a Fourier multiplier m(xi) slotwise.
    pub fn apply_multiplier(&self, m: impl Fn(f64) -> Complex64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, v)| v * m(self.grid.xi(k)))
            .collect();
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }

    /// H^s norm: (1/2pi) integral <xi>^{2s} |fhat|^2 dxi, discretized on the comb.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (k, v) in self.coeffs.iter().enumerate() {
            let w = japanese_bracket(self.grid.xi(k)).powf(2.0 * s);
            acc += w * v.norm_sqr();
        }
        (acc / (2.0 * self.grid.l())).sqrt()
    }

    /// L^2 norm of the frequency tail |xi| >= lambda, with H^s weight.
    pub fn tail_norm(&self, lambda: f64, s: f64) -> f64 {
        let mut acc = 0.0;
        for (k, v) in self.coeffs.iter().enumerate() {
            let xi = self.grid.xi(k);
            if xi.abs() >= lambda {
                let w = japanese_bracket(xi).powf(2.0 * s);
                acc += w * v.norm_sqr();
            }
        }
        (acc / (2.0 * self.grid.l())).sqrt()
    }

    /// Zeroes every coefficient with |xi| > lambda.
    pub fn band_limit(&self, lambda: f64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if self.grid.xi(k).abs() > lambda {
                    Complex64::new(0.0, 0.0)
                } else {
                    *v
                }
            })
            .collect();
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }
}

/// H^s norm of a physical-space field.
pub fn sobolev_norm(field: &Field, s: f64) -> f64 {
    forward(field).sobolev_norm(s)
}
