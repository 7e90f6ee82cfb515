//! Gauss-Legendre quadrature with composite panels, plus trapezoid helpers.
//!
//! Nodes and weights for the reference interval [-1, 1] come from Newton
//! iteration on the Legendre recurrence; they are cached per order since the
//! boundary kernels request the same orders repeatedly.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre P_n(x) and its derivative via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn compute_rule(n: usize) -> GaussRule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    GaussRule { nodes, weights }
}

/// Cached Gauss-Legendre rule of order `n`.
pub fn gauss_rule(n: usize) -> GaussRule {
    static CACHE: OnceLock<Mutex<HashMap<usize, GaussRule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n).or_insert_with(|| compute_rule(n)).clone()
}

/// Nodes and weights for one panel [a, b].
pub fn panel_nodes(a: f64, b: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_rule(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let nodes = rule.nodes.iter().map(|t| mid + half * t).collect();
    let weights = rule.weights.iter().map(|w| w * half).collect();
    (nodes, weights)
}

/// Composite Gauss-Legendre nodes over [a, b] split into `panels` equal panels.
pub fn composite_nodes(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(panels >= 1);
    assert!(b > a);
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let (mut ns, mut ws) = panel_nodes(lo, lo + width, order);
        nodes.append(&mut ns);
        weights.append(&mut ws);
    }
    (nodes, weights)
}

/// Integrates f over [a, b] with a composite rule.
pub fn integrate(a: f64, b: f64, panels: usize, order: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = composite_nodes(a, b, panels, order);
    nodes.iter().zip(&weights).map(|(x, w)| w * f(*x)).sum()
}

/// Trapezoid weights for a uniform grid of `m` samples with spacing `dt`.
pub fn trapezoid_weights(m: usize, dt: f64) -> Vec<f64> {
    assert!(m >= 2);
    let mut w = vec![dt; m];
    w[0] = 0.5 * dt;
    w[m - 1] = 0.5 * dt;
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gauss_rule_low_orders_match_references() {
        // Order 2: nodes +-1/sqrt(3), weights 1.
        let r2 = gauss_rule(2);
        assert_relative_eq!(r2.nodes[0], -(1.0 / 3.0f64).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(r2.nodes[1], (1.0 / 3.0f64).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(r2.weights[0], 1.0, epsilon = 1e-14);
        // Order 3: nodes 0, +-sqrt(3/5); weights 8/9, 5/9.
        let r3 = gauss_rule(3);
        assert_relative_eq!(r3.nodes[1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(r3.nodes[2], (0.6f64).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(r3.weights[1], 8.0 / 9.0, epsilon = 1e-14);
        assert_relative_eq!(r3.weights[2], 5.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 5, 16, 48, 96] {
            let r = gauss_rule(n);
            let s: f64 = r.weights.iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn polynomial_exactness() {
        // Order n integrates degree 2n-1 exactly: check x^9 on order 5.
        let v = integrate(0.0, 1.0, 1, 5, |x| x.powi(9));
        assert_relative_eq!(v, 0.1, epsilon = 1e-14);
    }

    #[test]
    fn sine_integral() {
        let v = integrate(0.0, PI, 4, 8, |x| x.sin());
        assert_relative_eq!(v, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn oscillatory_integral_with_panels() {
        // int_0^1 cos(40 x) dx = sin(40)/40; needs panels to resolve.
        let v = integrate(0.0, 1.0, 16, 8, |x| (40.0 * x).cos());
        assert_relative_eq!(v, (40.0f64).sin() / 40.0, epsilon = 1e-10);
    }

    #[test]
    fn trapezoid_weights_shape() {
        let w = trapezoid_weights(5, 0.1);
        assert_relative_eq!(w[0], 0.05);
        assert_relative_eq!(w[4], 0.05);
        assert_relative_eq!(w.iter().sum::<f64>(), 0.4);
    }
}
