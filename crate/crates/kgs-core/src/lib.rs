//! Spectral solver for the Klein-Gordon-Schrodinger system on the half-line.
//!
//! The half-line initial-boundary-value problem
//!
//! ```text
//!   i u_t + u_xx = -n u,            u(x, 0) = u0,  u(0, t) = g(t),
//!   n_tt + (1 - d_xx) n = |u|^2,    n(x, 0) = n0,  n_t(x, 0) = n1,  n(0, t) = h(t),
//! ```
//!
//! is solved constructively: data is extended to a symmetric torus surrogate
//! of the line, linear pieces evolve by Fourier multipliers, boundary traces
//! are matched by explicit oscillatory-kernel operators, and the coupled
//! system is the fixed point of a Duhamel-type contraction run window by
//! window with odd re-extension of the wave component.
//!
//! Module map:
//! - [`grid`]: torus grid, transforms, Sobolev norms;
//! - [`cutoff`]: smooth time bumps and the one-sided kernel mollifier;
//! - [`quadrature`]: Gauss-Legendre panels and trapezoid helpers;
//! - [`halfline`]: half-line data, extension policies, time series;
//! - [`flows`]: Schrodinger, Klein-Gordon, and half-wave propagators;
//! - [`boundary`]: boundary-to-field kernel operators;
//! - [`duhamel`]: the contraction map and its fixed-point iteration;
//! - [`solver`]: window selection, local and global solves, diagnostics;
//! - [`bourgain`]: space-time norms and the estimate-ratio laboratory;
//! - [`oracle`]: finite-difference reference solvers.

pub mod boundary;
pub mod bourgain;
pub mod cutoff;
pub mod duhamel;
pub mod flows;
pub mod grid;
pub mod halfline;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod spacetime;
