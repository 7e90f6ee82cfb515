//! Half-line data: samples on [0, L], extension policies to the full grid,
//! restriction back, and extension-based Sobolev norm proxies.
//!
//! Extensions are strategies behind a common trait so runs can select them by
//! name. The odd extension flips sign across the origin and pins f(0) = 0;
//! the zero extension pads x < 0 with zeros and keeps the sample at 0. Both
//! force the wrapped end node x = +-L to zero, so data is expected to be
//! negligible near L (the edge-mass diagnostic guards this).

use crate::grid::{sobolev_norm, Field, SpatialGrid};
use num_complex::Complex64;

/// Samples f(j * dx), j = 0..=N/2, matching the right half of a [`SpatialGrid`].
#[derive(Debug, Clone)]
pub struct HalfLineFunction {
    pub dx: f64,
    pub values: Vec<Complex64>,
}

impl HalfLineFunction {
    /// Samples a function on the half-line nodes of `grid`.
    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let half = grid.n() / 2;
        HalfLineFunction {
            dx: grid.dx(),
            values: (0..=half).map(|j| f(j as f64 * grid.dx())).collect(),
        }
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        HalfLineFunction {
            dx: grid.dx(),
            values: vec![Complex64::new(0.0, 0.0); grid.n() / 2 + 1],
        }
    }

    /// Value at x = 0.
    pub fn at_origin(&self) -> Complex64 {
        self.values[0]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn imag_sup(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    fn assert_matches(&self, grid: SpatialGrid) {
        assert_eq!(
            self.values.len(),
            grid.n() / 2 + 1,
            "half-line sample count does not match grid"
        );
        assert!(
            (self.dx - grid.dx()).abs() <= 1e-12 * grid.dx(),
            "half-line spacing does not match grid"
        );
    }

    /// Parses `coordinate,value` or `coordinate,value_re,value_im` lines.
    ///
    /// Requires coordinates to start at 0 and be uniformly spaced. A header
    /// line is skipped if the first field does not parse as a number.
    pub fn from_csv_str(text: &str) -> Result<Self, String> {
        let (xs, vs) = parse_csv_columns(text)?;
        if xs.len() < 2 {
            return Err("need at least two samples".into());
        }
        if xs[0].abs() > 1e-9 {
            return Err(format!("coordinates must start at 0, got {}", xs[0]));
        }
        let dx = xs[1] - xs[0];
        if dx <= 0.0 {
            return Err("coordinates must be increasing".into());
        }
        for (i, pair) in xs.windows(2).enumerate() {
            let step = pair[1] - pair[0];
            if (step - dx).abs() > 1e-6 * dx {
                return Err(format!("non-uniform spacing at row {}", i + 1));
            }
        }
        Ok(HalfLineFunction { dx, values: vs })
    }
}

/// Uniform time samples h(j * dt), j = 0..len-1, starting at t = 0.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub dt: f64,
    pub values: Vec<Complex64>,
}

impl TimeSeries {
    pub fn from_fn(dt: f64, len: usize, f: impl Fn(f64) -> Complex64) -> Self {
        assert!(dt > 0.0 && len >= 2);
        TimeSeries {
            dt,
            values: (0..len).map(|j| f(j as f64 * dt)).collect(),
        }
    }

    pub fn zeros(dt: f64, len: usize) -> Self {
        TimeSeries {
            dt,
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn duration(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }

    pub fn at_start(&self) -> Complex64 {
        self.values[0]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn imag_sup(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// One-sided transform ghat(mu) = integral_0^inf e^{-i mu t} h(t) dt,
    /// trapezoid over the sampled support (the series should have decayed
    /// by its last sample; the integrand is treated as 0 beyond it).
    pub fn halfline_time_transform(&self, mu: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let m = self.values.len();
        for (j, v) in self.values.iter().enumerate() {
            let w = if j == 0 || j == m - 1 { 0.5 } else { 1.0 };
            let phase = -mu * self.t(j);
            acc += w * v * Complex64::new(phase.cos(), phase.sin());
        }
        acc * self.dt
    }

    /// Periodic-comb Sobolev norm in time: weight <tau>^s on the DFT of the
    /// samples. A proxy norm; adequate for the step-size selection heuristic.
    pub fn sobolev_norm_time(&self, s: f64) -> f64 {
        let m = self.values.len();
        let span = m as f64 * self.dt;
        let mut acc = 0.0;
        // Direct DFT: series used here are short; no plan caching needed.
        for k in 0..m {
            let signed = if k <= m / 2 {
                k as isize
            } else {
                k as isize - m as isize
            };
            let tau = 2.0 * std::f64::consts::PI * signed as f64 / span;
            let mut c = Complex64::new(0.0, 0.0);
            for (j, v) in self.values.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * (j * k % m) as f64 / m as f64;
                c += v * Complex64::new(phase.cos(), phase.sin());
            }
            c *= self.dt;
            acc += (1.0 + tau * tau).powf(s) * c.norm_sqr();
        }
        (acc / span).sqrt()
    }

    /// Parses `coordinate,value` or `coordinate,value_re,value_im` lines.
    pub fn from_csv_str(text: &str) -> Result<Self, String> {
        let (ts, vs) = parse_csv_columns(text)?;
        if ts.len() < 2 {
            return Err("need at least two samples".into());
        }
        if ts[0].abs() > 1e-9 {
            return Err(format!("time samples must start at 0, got {}", ts[0]));
        }
        let dt = ts[1] - ts[0];
        if dt <= 0.0 {
            return Err("time samples must be increasing".into());
        }
        for (i, pair) in ts.windows(2).enumerate() {
            let step = pair[1] - pair[0];
            if (step - dt).abs() > 1e-6 * dt {
                return Err(format!("non-uniform spacing at row {}", i + 1));
            }
        }
        Ok(TimeSeries { dt, values: vs })
    }
}

fn parse_csv_columns(text: &str) -> Result<(Vec<f64>, Vec<Complex64>), String> {
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(format!("line {}: expected 2 or 3 fields", lineno + 1));
        }
        let x: f64 = match fields[0].parse() {
            Ok(v) => v,
            Err(_) if xs.is_empty() => continue, // header line
            Err(e) => return Err(format!("line {}: bad coordinate: {}", lineno + 1, e)),
        };
        let re: f64 = fields[1]
            .parse()
            .map_err(|e| format!("line {}: bad value: {}", lineno + 1, e))?;
        let im: f64 = if fields.len() == 3 {
            fields[2]
                .parse()
                .map_err(|e| format!("line {}: bad value: {}", lineno + 1, e))?
        } else {
            0.0
        };
        xs.push(x);
        vs.push(Complex64::new(re, im));
    }
    Ok((xs, vs))
}

/// An extension of half-line data to the symmetric grid, selectable by name.
pub trait ExtensionPolicy: Send + Sync {
    fn name(&self) -> &'static str;
    fn extend(&self, f: &HalfLineFunction, grid: SpatialGrid) -> Field;
}

/// Odd reflection: F(-x) = -f(x), F(0) = F(+-L) = 0.
pub struct OddExtension;

/// Zero padding: F(x) = f(x) for x >= 0, 0 for x < 0, F(+-L) = 0.
pub struct ZeroExtension;

impl ExtensionPolicy for OddExtension {
    fn name(&self) -> &'static str {
        "odd"
    }

    fn extend(&self, f: &HalfLineFunction, grid: SpatialGrid) -> Field {
        f.assert_matches(grid);
        let half = grid.n() / 2;
        let o = grid.origin_index();
        let mut out = Field::zeros(grid);
        for j in 1..half {
            out.values[o + j] = f.values[j];
            out.values[o - j] = -f.values[j];
        }
        out
    }
}

impl ExtensionPolicy for ZeroExtension {
    fn name(&self) -> &'static str {
        "zero"
    }

    fn extend(&self, f: &HalfLineFunction, grid: SpatialGrid) -> Field {
        f.assert_matches(grid);
        let half = grid.n() / 2;
        let o = grid.origin_index();
        let mut out = Field::zeros(grid);
        for j in 0..half {
            out.values[o + j] = f.values[j];
        }
        out
    }
}

/// Looks up an extension policy by its registered name.
pub fn extension_by_name(name: &str) -> Option<Box<dyn ExtensionPolicy>> {
    match name {
        "odd" => Some(Box::new(OddExtension)),
        "zero" => Some(Box::new(ZeroExtension)),
        _ => None,
    }
}

/// Names of the registered extension policies.
pub fn extension_names() -> Vec<&'static str> {
    vec!["odd", "zero"]
}

/// Restriction of a full-grid field to the half-line nodes.
///
/// The x = L sample is read from the wrapped node j = 0.
pub fn restrict(field: &Field) -> HalfLineFunction {
    let grid = field.grid;
    let half = grid.n() / 2;
    let o = grid.origin_index();
    let mut values = Vec::with_capacity(half + 1);
    for j in 0..half {
        values.push(field.values[o + j]);
    }
    values.push(field.values[0]);
    HalfLineFunction {
        dx: grid.dx(),
        values,
    }
}

/// H^s proxy norm of half-line data: the norm of its chosen extension.
///
/// This upper-bounds the intrinsic half-line norm (an infimum over all
/// extensions) and is equivalent to it for the policies provided here in
/// their validity ranges (odd for |s| < 3/2, zero for |s| < 1/2).
pub fn halfline_norm(
    f: &HalfLineFunction,
    grid: SpatialGrid,
    s: f64,
    policy: &dyn ExtensionPolicy,
) -> f64 {
    sobolev_norm(&policy.extend(f, grid), s)
}

/// One compatibility condition at the corner (x, t) = (0, 0).
#[derive(Debug, Clone)]
pub struct CompatibilityCondition {
    /// Human-readable label of the matched pair.
    pub label: String,
    /// Whether the regularity threshold makes the condition mandatory.
    pub required: bool,
    /// |data(0) - boundary(0)|.
    pub mismatch: f64,
    pub satisfied: bool,
}

/// Checks corner compatibility between initial data and boundary traces.
///
/// The u-condition u0(0) = g(0) binds for s0 > 1/2, the wave condition
/// h(0) = n0(0) for s1 > 1/2; below those thresholds the conditions are
/// reported but not required.
pub fn compatibility_check(
    u0: &HalfLineFunction,
    g: &TimeSeries,
    s0: f64,
    n0: &HalfLineFunction,
    h: &TimeSeries,
    s1: f64,
    tol: f64,
) -> Vec<CompatibilityCondition> {
    let mu = (u0.at_origin() - g.at_start()).norm();
    let mn = (n0.at_origin() - h.at_start()).norm();
    vec![
        CompatibilityCondition {
            label: "u0(0) = g(0)".into(),
            required: s0 > 0.5,
            mismatch: mu,
            satisfied: mu <= tol,
        },
        CompatibilityCondition {
            label: "n0(0) = h(0)".into(),
            required: s1 > 0.5,
            mismatch: mn,
            satisfied: mn <= tol,
        },
    ]
}
