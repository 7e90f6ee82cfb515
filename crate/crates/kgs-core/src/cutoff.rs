//! Smooth cutoff profiles shared by the boundary kernels and the fixed-point map.
//!
//! `eta` is the standard C-infinity time bump: identically 1 on [-1, 1],
//! supported in [-2, 2], glued with the exp(-1/x) bridge. `rho` is the
//! one-sided mollifier that tames the growing exponential in the boundary
//! kernels for x < 0: rho(y) = 1 for y >= 0 and 0 for y <= -1.

/// exp(-1/x) for x > 0, else 0; the C-infinity gluing seed.
fn psi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth time bump: 1 on [-1, 1], 0 outside (-2, 2).
pub fn eta(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let up = psi(2.0 - a);
        let down = psi(a - 1.0);
        up / (up + down)
    }
}

/// Rescaled bump eta(t / T): 1 on [-T, T], supported in (-2T, 2T).
pub fn eta_scaled(t: f64, big_t: f64) -> f64 {
    assert!(big_t > 0.0, "cutoff scale must be positive");
    eta(t / big_t)
}

/// One-sided smooth step: 1 for y >= 0, 0 for y <= -1.
pub fn rho(y: f64) -> f64 {
    if y >= 0.0 {
        1.0
    } else if y <= -1.0 {
        0.0
    } else {
        let up = psi(1.0 + y);
        let down = psi(-y);
        up / (up + down)
    }
}

/// exp(-y) * rho(y), evaluated without forming exp(-y) where rho vanishes.
///
/// This is the decaying kernel profile of the boundary integrals; the naked
/// exponential overflows for y << 0 but the product is bounded by e.
pub fn exp_neg_rho(y: f64) -> f64 {
    if y <= -1.0 {
        0.0
    } else {
        (-y).exp() * rho(y)
    }
}

/// Indicator of [0, infinity).
pub fn chi(t: f64) -> f64 {
    if t >= 0.0 {
        1.0
    } else {
        0.0
    }
}
