//! Linear propagators as Fourier multipliers on the grid.
//!
//! The half-wave symbol is m(xi) = sgn(xi) sqrt(1 + xi^2) with sgn(0) = 1, so
//! m never vanishes and its inverse is bounded by 1. The Klein-Gordon flow
//! n_tt + (1 - Laplacian) n = 0 factors through e^{+-i t m} acting on
//! phi_+- = n0 -+ i m^{-1} n1; equivalently the cosine/sinc multipliers below.

use crate::grid::{forward, inverse, japanese_bracket, signum_plus, Field, SpectralField};
use num_complex::Complex64;

/// Half-wave symbol sgn(xi) sqrt(1 + xi^2).
pub fn half_wave_symbol(xi: f64) -> f64 {
    signum_plus(xi) * japanese_bracket(xi)
}

/// Applies D: multiplier sgn(xi) sqrt(1 + xi^2).
pub fn apply_d(spec: &SpectralField) -> SpectralField {
    spec.apply_multiplier(|xi| Complex64::new(half_wave_symbol(xi), 0.0))
}

/// Applies D^{-1}: multiplier sgn(xi) / sqrt(1 + xi^2), bounded by 1.
pub fn apply_d_inverse(spec: &SpectralField) -> SpectralField {
    spec.apply_multiplier(|xi| Complex64::new(signum_plus(xi) / japanese_bracket(xi), 0.0))
}

/// Free Schrodinger propagator e^{i t Laplacian}: multiplier e^{-i t xi^2}.
pub fn schrodinger_flow_spec(u0: &SpectralField, t: f64) -> SpectralField {
    u0.apply_multiplier(|xi| Complex64::from_polar(1.0, -t * xi * xi))
}

/// Physical-space wrapper for [`schrodinger_flow_spec`].
pub fn schrodinger_flow(u0: &Field, t: f64) -> Field {
    inverse(&schrodinger_flow_spec(&forward(u0), t))
}

/// Half-wave propagator e^{+-i t D}: multiplier e^{+-i t m(xi)}.
pub fn half_wave_flow_spec(phi: &SpectralField, t: f64, plus: bool) -> SpectralField {
    let sign = if plus { 1.0 } else { -1.0 };
    phi.apply_multiplier(|xi| Complex64::from_polar(1.0, sign * t * half_wave_symbol(xi)))
}

/// Physical-space wrapper for [`half_wave_flow_spec`].
pub fn half_wave_flow(phi: &Field, t: f64, plus: bool) -> Field {
    inverse(&half_wave_flow_spec(&forward(phi), t, plus))
}

/// The pair phi_+- = n0 -+ i D^{-1} n1 driving the half-wave representation.
#[derive(Debug, Clone)]
pub struct PhiPair {
    pub plus: SpectralField,
    pub minus: SpectralField,
}

impl PhiPair {
    /// Builds phi_+- from extended initial data (n0, n1).
    pub fn from_data(n0: &Field, n1: &Field) -> Self {
        let n0s = forward(n0);
        let dinv_n1 = apply_d_inverse(&forward(n1));
        let i = Complex64::new(0.0, 1.0);
        let plus = SpectralField {
            grid: n0s.grid,
            coeffs: n0s
                .coeffs
                .iter()
                .zip(&dinv_n1.coeffs)
                .map(|(a, b)| a - i * b)
                .collect(),
        };
        let minus = SpectralField {
            grid: n0s.grid,
            coeffs: n0s
                .coeffs
                .iter()
                .zip(&dinv_n1.coeffs)
                .map(|(a, b)| a + i * b)
                .collect(),
        };
        PhiPair { plus, minus }
    }

    /// Recovers (n0, n1) spectra: n0 = (phi_+ + phi_-)/2, n1 = iD(phi_+ - phi_-)/2.
    pub fn to_data(&self) -> (SpectralField, SpectralField) {
        let half = Complex64::new(0.5, 0.0);
        let n0 = SpectralField {
            grid: self.plus.grid,
            coeffs: self
                .plus
                .coeffs
                .iter()
                .zip(&self.minus.coeffs)
                .map(|(a, b)| (a + b) * half)
                .collect(),
        };
        let diff = SpectralField {
            grid: self.plus.grid,
            coeffs: self
                .plus
                .coeffs
                .iter()
                .zip(&self.minus.coeffs)
                .map(|(a, b)| (a - b) * Complex64::new(0.0, 0.5))
                .collect(),
        };
        let n1 = apply_d(&diff);
        (n0, n1)
    }
}

/// Klein-Gordon cosine propagator: multiplier cos(t sqrt(1 + xi^2)).
pub fn kg_cos_spec(n0: &SpectralField, t: f64) -> SpectralField {
    n0.apply_multiplier(|xi| Complex64::new((t * japanese_bracket(xi)).cos(), 0.0))
}

/// Klein-Gordon sinc propagator: multiplier sin(t sqrt(1+xi^2))/sqrt(1+xi^2).
pub fn kg_sinc_spec(n1: &SpectralField, t: f64) -> SpectralField {
    n1.apply_multiplier(|xi| {
        let b = japanese_bracket(xi);
        Complex64::new((t * b).sin() / b, 0.0)
    })
}

/// Free Klein-Gordon evolution of (n0, n1); returns (n(t), n_t(t)) spectra.
///
/// All four multipliers are even and real, so realness and parity of the
/// data survive exactly.
pub fn kg_flow_spec(n0: &SpectralField, n1: &SpectralField, t: f64) -> (SpectralField, SpectralField) {
    let n = SpectralField {
        grid: n0.grid,
        coeffs: n0
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let b = japanese_bracket(n0.grid.xi(k));
                let (s, c) = (t * b).sin_cos();
                a * c + n1.coeffs[k] * (s / b)
            })
            .collect(),
    };
    let nt = SpectralField {
        grid: n0.grid,
        coeffs: n0
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let b = japanese_bracket(n0.grid.xi(k));
                let (s, c) = (t * b).sin_cos();
                a * (-b * s) + n1.coeffs[k] * c
            })
            .collect(),
    };
    (n, nt)
}

/// Physical-space Klein-Gordon flow; returns (n(t), n_t(t)).
pub fn kg_flow(n0: &Field, n1: &Field, t: f64) -> (Field, Field) {
    let (n, nt) = kg_flow_spec(&forward(n0), &forward(n1), t);
    (inverse(&n), inverse(&nt))
}
