//! Run configuration: the TOML schema, its defaults and validation, and the
//! builders that turn declarative data/signal specs into concrete objects.
//!
//! Every field has a default, so an empty file is a valid configuration; the
//! full default table is reproduced in the repository README.  Validation is
//! pure (no filesystem access); file-backed specs are checked when built.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use kgs_core::boundary::KernelConfig;
use kgs_core::grid::{inverse, japanese_bracket, sobolev_norm, Field, SpatialGrid, SpectralField};
use kgs_core::halfline::{extension_by_name, HalfLineFunction, TimeSeries};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Boxed time signal with complex values.
pub type ComplexSignal = Box<dyn Fn(f64) -> Complex64 + Send + Sync>;
/// Boxed time signal with real values.
pub type RealSignal = Box<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Optional experiment name; must match the subcommand when present.
    pub experiment: Option<String>,
    /// Base seed for every randomized ingredient of the run.
    pub seed: u64,
    /// Output directory; the command line `--out` takes precedence.
    pub out_dir: Option<String>,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub data: DataConfig,
    pub boundary: BoundaryConfig,
    pub regularity: RegularityConfig,
    pub tolerances: Tolerances,
    pub picard: PicardConfig,
    pub kernel: KernelTuning,
    pub fd: FdConfig,
    pub ensemble: EnsembleSection,
    pub smoothing: SmoothingSection,
    /// When present, `local-solve` runs a seeded batch of random small-data
    /// problems instead of the single configured one.
    pub suite: Option<SuiteConfig>,
    pub outputs: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: None,
            seed: 7,
            out_dir: None,
            grid: GridConfig::default(),
            time: TimeConfig::default(),
            data: DataConfig::default(),
            boundary: BoundaryConfig::default(),
            regularity: RegularityConfig::default(),
            tolerances: Tolerances::default(),
            picard: PicardConfig::default(),
            kernel: KernelTuning::default(),
            fd: FdConfig::default(),
            ensemble: EnsembleSection::default(),
            smoothing: SmoothingSection::default(),
            suite: None,
            outputs: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Half-width of the symmetric spatial domain [-L, L).
    pub l: f64,
    /// Number of spatial nodes (even).
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { l: 15.0, n: 256 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    /// Final physical time of the run.
    pub t_final: f64,
    /// Dense output step; window lengths snap to this grid.
    pub dt: f64,
    /// Window-selection constant: T = c_t * min(1, norms^-2), in (0, 1/2].
    pub c_t: f64,
    /// Fixed window length, overriding the norm-based selection.
    pub t_window: Option<f64>,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            t_final: 0.5,
            dt: 1e-3,
            c_t: 0.1,
            t_window: None,
        }
    }
}

/// How half-line data is extended to the symmetric grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionKind {
    Odd,
    Zero,
}

impl ExtensionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtensionKind::Odd => "odd",
            ExtensionKind::Zero => "zero",
        }
    }
}

/// Declarative initial-data spec: an analytic preset, a random spectrum, or
/// a CSV profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    /// amp * exp(-((x - center) / width)^2) on the half line, extended.
    Gaussian {
        amp: f64,
        center: f64,
        width: f64,
        extension: ExtensionKind,
    },
    /// Random-phase spectrum |coeff(xi)| = <xi>^-decay up to the band cutoff,
    /// rescaled so the H^norm_s norm equals `norm`.
    RoughSobolev {
        norm: f64,
        norm_s: f64,
        decay: f64,
        /// Absolute frequency cutoff; the full grid band when absent.
        band: Option<f64>,
        #[serde(default)]
        seed_salt: u64,
        /// Project onto real values (for wave data) before rescaling.
        #[serde(default)]
        real: bool,
        /// Project onto the odd part (zero trace at x = 0) before rescaling.
        #[serde(default)]
        odd: bool,
    },
    /// Half-line profile from a CSV file (x, re[, im]) on the grid nodes.
    Csv {
        path: String,
        extension: ExtensionKind,
    },
}

impl FieldSpec {
    pub fn is_zero(&self) -> bool {
        matches!(self, FieldSpec::Zero)
    }

    /// The same spec with the grid extension replaced (for twin runs).
    pub fn with_extension(&self, ext: ExtensionKind) -> Result<FieldSpec> {
        match self {
            FieldSpec::Zero => Ok(FieldSpec::Zero),
            FieldSpec::Gaussian {
                amp,
                center,
                width,
                ..
            } => Ok(FieldSpec::Gaussian {
                amp: *amp,
                center: *center,
                width: *width,
                extension: ext,
            }),
            FieldSpec::Csv { path, .. } => Ok(FieldSpec::Csv {
                path: path.clone(),
                extension: ext,
            }),
            FieldSpec::RoughSobolev { .. } => {
                bail!("a random-spectrum field has no half-line profile to re-extend")
            }
        }
    }

    fn validate(&self, label: &str) -> Result<()> {
        match self {
            FieldSpec::Zero => Ok(()),
            FieldSpec::Gaussian { amp, width, .. } => {
                if !amp.is_finite() || !width.is_finite() || *width <= 0.0 {
                    bail!("{label}: gaussian needs finite amp and width > 0");
                }
                Ok(())
            }
            FieldSpec::RoughSobolev {
                norm, decay, band, ..
            } => {
                if !(norm.is_finite() && *norm > 0.0) {
                    bail!("{label}: rough-sobolev needs norm > 0");
                }
                if !(decay.is_finite() && *decay > 0.0) {
                    bail!("{label}: rough-sobolev needs decay > 0");
                }
                if let Some(b) = band {
                    if !(b.is_finite() && *b > 0.0) {
                        bail!("{label}: rough-sobolev band must be positive");
                    }
                }
                Ok(())
            }
            FieldSpec::Csv { path, .. } => {
                if path.is_empty() {
                    bail!("{label}: csv path is empty");
                }
                Ok(())
            }
        }
    }

    /// Materializes the spec on the grid.  `base_dir` anchors relative CSV
    /// paths (normally the configuration file's directory).
    pub fn build(&self, grid: SpatialGrid, seed: u64, base_dir: &Path) -> Result<Field> {
        match self {
            FieldSpec::Zero => Ok(Field::zeros(grid)),
            FieldSpec::Gaussian {
                amp,
                center,
                width,
                extension,
            } => {
                let (a, c, w) = (*amp, *center, *width);
                let profile = HalfLineFunction::from_fn(grid, |x| {
                    Complex64::new(a * (-((x - c) / w).powi(2)).exp(), 0.0)
                });
                let policy = extension_by_name(extension.as_str())
                    .ok_or_else(|| anyhow!("unknown extension"))?;
                Ok(policy.extend(&profile, grid))
            }
            FieldSpec::RoughSobolev {
                norm,
                norm_s,
                decay,
                band,
                seed_salt,
                real,
                odd,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed.wrapping_add(seed_salt.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
                );
                let mut spec = SpectralField::zeros(grid);
                for k in 0..grid.n() {
                    let xi = grid.xi(k);
                    // Draw for every mode so the stream does not depend on
                    // the band cutoff, then zero the out-of-band ones.
                    let re: f64 = rng.gen_range(-1.0..1.0);
                    let im: f64 = rng.gen_range(-1.0..1.0);
                    if band.map_or(true, |b| xi.abs() <= b) {
                        let mag = japanese_bracket(xi).powf(-decay);
                        spec.coeffs[k] = mag * Complex64::new(re, im);
                    }
                }
                let mut field = inverse(&spec);
                if *real {
                    for v in field.values.iter_mut() {
                        *v = Complex64::new(v.re, 0.0);
                    }
                }
                if *odd {
                    field = field.odd_part();
                }
                let have = sobolev_norm(&field, *norm_s);
                if have <= 0.0 {
                    bail!("rough-sobolev spec produced an empty spectrum");
                }
                Ok(field.scale(Complex64::new(norm / have, 0.0)))
            }
            FieldSpec::Csv { path, extension } => {
                let full = base_dir.join(path);
                let text = std::fs::read_to_string(&full)
                    .with_context(|| format!("reading field csv {}", full.display()))?;
                let profile = HalfLineFunction::from_csv_str(&text)
                    .map_err(|e| anyhow!("{}: {e}", full.display()))?;
                let want = grid.n() / 2 + 1;
                if profile.values.len() != want {
                    bail!(
                        "{}: expected {want} half-line samples for n = {}, found {}",
                        full.display(),
                        grid.n(),
                        profile.values.len()
                    );
                }
                if (profile.dx - grid.dx()).abs() > 1e-9 * grid.dx() {
                    bail!(
                        "{}: sample spacing {} does not match the grid spacing {}",
                        full.display(),
                        profile.dx,
                        grid.dx()
                    );
                }
                let policy = extension_by_name(extension.as_str())
                    .ok_or_else(|| anyhow!("unknown extension"))?;
                Ok(policy.extend(&profile, grid))
            }
        }
    }

    /// Analytic closure of the half-line profile, for oracle solvers that
    /// sample data on their own grid.
    pub fn halfline_closure(&self, base_dir: &Path) -> Result<ComplexSignal> {
        match self {
            FieldSpec::Zero => Ok(Box::new(|_| Complex64::new(0.0, 0.0))),
            FieldSpec::Gaussian {
                amp,
                center,
                width,
                ..
            } => {
                let (a, c, w) = (*amp, *center, *width);
                Ok(Box::new(move |x| {
                    Complex64::new(a * (-((x - c) / w).powi(2)).exp(), 0.0)
                }))
            }
            FieldSpec::Csv { path, .. } => {
                let full = base_dir.join(path);
                let text = std::fs::read_to_string(&full)
                    .with_context(|| format!("reading field csv {}", full.display()))?;
                let profile = HalfLineFunction::from_csv_str(&text)
                    .map_err(|e| anyhow!("{}: {e}", full.display()))?;
                let dx = profile.dx;
                let values = profile.values;
                Ok(Box::new(move |x| {
                    let pos = (x / dx).clamp(0.0, (values.len() - 1) as f64);
                    let j = (pos.floor() as usize).min(values.len() - 2);
                    let w = pos - j as f64;
                    values[j] * (1.0 - w) + values[j + 1] * w
                }))
            }
            FieldSpec::RoughSobolev { .. } => {
                bail!("a random-spectrum field has no closed-form profile for the oracle")
            }
        }
    }
}

/// Declarative boundary-signal spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalSpec {
    Zero,
    /// amp * t^power * exp(-rate t): vanishes at t = 0 for power >= 1.
    PolyExp { amp: f64, power: u32, rate: f64 },
    /// amp * sin(omega t) * (1 - exp(-ramp t^2)): real, flat start.
    SineRamp { amp: f64, omega: f64, ramp: f64 },
    /// amp * exp(-i omega t) * (1 - exp(-ramp t^2)): complex, flat start.
    RotorRamp { amp: f64, omega: f64, ramp: f64 },
    /// amp * exp(rate t) * sin(omega t): real, exponentially modulated.
    SineExp { amp: f64, omega: f64, rate: f64 },
    /// Uniformly sampled series from a CSV file (t, re[, im]).
    Csv { path: String },
}

impl SignalSpec {
    pub fn is_zero(&self) -> bool {
        matches!(self, SignalSpec::Zero)
    }

    fn validate(&self, label: &str) -> Result<()> {
        match self {
            SignalSpec::Zero => Ok(()),
            SignalSpec::PolyExp { amp, rate, .. } => {
                if !amp.is_finite() || !rate.is_finite() || *rate < 0.0 {
                    bail!("{label}: poly-exp needs finite amp and rate >= 0");
                }
                Ok(())
            }
            SignalSpec::SineRamp { amp, omega, ramp }
            | SignalSpec::RotorRamp { amp, omega, ramp } => {
                if !amp.is_finite() || !omega.is_finite() || !ramp.is_finite() || *ramp < 0.0 {
                    bail!("{label}: ramped signal needs finite parameters and ramp >= 0");
                }
                Ok(())
            }
            SignalSpec::SineExp { amp, omega, rate } => {
                if !amp.is_finite() || !omega.is_finite() || !rate.is_finite() {
                    bail!("{label}: sine-exp needs finite amp, omega and rate");
                }
                Ok(())
            }
            SignalSpec::Csv { path } => {
                if path.is_empty() {
                    bail!("{label}: csv path is empty");
                }
                Ok(())
            }
        }
    }

    pub fn build_complex(&self, base_dir: &Path) -> Result<ComplexSignal> {
        match self {
            SignalSpec::Zero => Ok(Box::new(|_| Complex64::new(0.0, 0.0))),
            SignalSpec::PolyExp { amp, power, rate } => {
                let (a, p, r) = (*amp, *power as i32, *rate);
                Ok(Box::new(move |t| {
                    Complex64::new(a * t.powi(p) * (-r * t).exp(), 0.0)
                }))
            }
            SignalSpec::SineRamp { amp, omega, ramp } => {
                let (a, w, r) = (*amp, *omega, *ramp);
                Ok(Box::new(move |t| {
                    Complex64::new(a * (w * t).sin() * (1.0 - (-r * t * t).exp()), 0.0)
                }))
            }
            SignalSpec::RotorRamp { amp, omega, ramp } => {
                let (a, w, r) = (*amp, *omega, *ramp);
                Ok(Box::new(move |t| {
                    let env = a * (1.0 - (-r * t * t).exp());
                    Complex64::from_polar(env, -w * t)
                }))
            }
            SignalSpec::SineExp { amp, omega, rate } => {
                let (a, w, r) = (*amp, *omega, *rate);
                Ok(Box::new(move |t| {
                    Complex64::new(a * (r * t).exp() * (w * t).sin(), 0.0)
                }))
            }
            SignalSpec::Csv { path } => {
                let series = self.read_series(base_dir, path)?;
                Ok(Box::new(move |t| sample_series(&series, t)))
            }
        }
    }

    /// Real-valued build; rejects inherently complex specs.
    pub fn build_real(&self, base_dir: &Path) -> Result<RealSignal> {
        match self {
            SignalSpec::RotorRamp { .. } => {
                bail!("a rotor-ramp signal is complex-valued; the wave trace must be real")
            }
            SignalSpec::Csv { path } => {
                let series = self.read_series(base_dir, path)?;
                if series.imag_sup() > 0.0 {
                    bail!("csv signal {path} has a nonzero imaginary column; the wave trace must be real");
                }
                Ok(Box::new(move |t| sample_series(&series, t).re))
            }
            _ => {
                let f = self.build_complex(base_dir)?;
                Ok(Box::new(move |t| f(t).re))
            }
        }
    }

    fn read_series(&self, base_dir: &Path, path: &str) -> Result<TimeSeries> {
        let full = base_dir.join(path);
        let text = std::fs::read_to_string(&full)
            .with_context(|| format!("reading signal csv {}", full.display()))?;
        TimeSeries::from_csv_str(&text).map_err(|e| anyhow!("{}: {e}", full.display()))
    }
}

/// Linear interpolation into a uniformly sampled series, zero outside.
fn sample_series(series: &TimeSeries, t: f64) -> Complex64 {
    if t < 0.0 || series.values.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let pos = t / series.dt;
    let last = series.values.len() - 1;
    if pos >= last as f64 {
        return Complex64::new(0.0, 0.0);
    }
    let j = pos.floor() as usize;
    let w = pos - j as f64;
    series.values[j] * (1.0 - w) + series.values[j + 1] * w
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub u0: FieldSpec,
    pub n0: FieldSpec,
    pub n1: FieldSpec,
    /// Wave-forcing treatment for single-window runs: "whole" keeps the
    /// coupling as computed; "odd-restrict" replaces it by the odd extension
    /// of its half-line restriction.
    pub wave_forcing: WaveForcingKind,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            u0: FieldSpec::Zero,
            n0: FieldSpec::Zero,
            n1: FieldSpec::Zero,
            wave_forcing: WaveForcingKind::Whole,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveForcingKind {
    Whole,
    OddRestrict,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryConfig {
    /// Dirichlet trace for the dispersive field.
    pub g: SignalSpec,
    /// Dirichlet trace for the wave field.
    pub h: SignalSpec,
}

impl Default for SignalSpec {
    fn default() -> Self {
        SignalSpec::Zero
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularityConfig {
    /// Dispersive-data regularity, in (-1/4, 1/2).
    pub s0: f64,
    /// Wave-data regularity, in (-1/2, 1/2).
    pub s1: f64,
    /// Expected extra regularity of the dispersive nonlinear remainder.
    pub a0: f64,
    /// Expected extra regularity of the wave nonlinear remainder.
    pub a1: f64,
    /// Temporal weight exponent for the estimate ensemble, in (0, 1/2).
    pub b: f64,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        RegularityConfig {
            s0: 0.25,
            s1: 0.25,
            a0: 0.4,
            a1: 0.4,
            b: 0.4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative space-time L2 budget against oracle solutions.
    pub rel_l2: f64,
    /// Trace-error budget as a fraction of the drive's sup.
    pub trace_frac: f64,
    /// Absolute budget for the spurious field at t = 0.
    pub t0: f64,
    /// Largest allowed contraction ratio in the fixed-point iteration.
    pub picard_ratio: f64,
    /// Largest allowed iteration count.
    pub picard_iters: usize,
    /// Relative disagreement budget between extension-twin runs.
    pub ext_agree: f64,
    /// Largest allowed ratio-vs-resolution slope in the estimate ensemble.
    pub ensemble_slope: f64,
    /// Smoothing check: tail-slope gap must reach a0 minus this margin.
    pub slope_gap_margin: f64,
    /// When set, arms the half-line mass-drift check on global runs.
    pub drift: Option<f64>,
    /// When set, arms the wave-oddness check on global runs.
    pub even_global: Option<f64>,
    /// When set, arms the log-growth linear-fit residual check (fraction of
    /// the fitted range) on global runs.
    pub fit_resid_frac: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel_l2: 5e-2,
            trace_frac: 1e-2,
            t0: 1e-8,
            picard_ratio: 0.5,
            picard_iters: 20,
            ext_agree: 1e-3,
            ensemble_slope: 0.1,
            slope_gap_margin: 0.1,
            drift: None,
            even_global: None,
            fit_resid_frac: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    /// Residual target relative to the problem scale.
    pub tol: f64,
    pub max_iter: usize,
    /// Boundary-operator skip threshold relative to the problem scale.
    pub skip_rel: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            tol: 1e-8,
            max_iter: 25,
            skip_rel: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelTuning {
    pub n_a: usize,
    pub n_b: usize,
    pub xi_kg_factor: f64,
    pub xi_w0_factor: f64,
    pub central_order: usize,
    pub project_t0: bool,
}

impl Default for KernelTuning {
    fn default() -> Self {
        let k = KernelConfig::default();
        KernelTuning {
            n_a: k.n_a,
            n_b: k.n_b,
            xi_kg_factor: k.xi_kg_factor,
            xi_w0_factor: k.xi_w0_factor,
            central_order: k.central_order,
            project_t0: k.project_t0,
        }
    }
}

impl KernelTuning {
    pub fn to_core(&self) -> KernelConfig {
        KernelConfig {
            n_a: self.n_a,
            n_b: self.n_b,
            xi_kg_factor: self.xi_kg_factor,
            xi_w0_factor: self.xi_w0_factor,
            central_order: self.central_order,
            project_t0: self.project_t0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdConfig {
    /// Compare single-window runs against the finite-difference oracle.
    pub compare: bool,
    /// Wall position of the oracle domain; the grid half-width when absent.
    pub x_max: Option<f64>,
    /// Oracle cell count.
    pub cells: usize,
    /// Oracle substeps per output step.
    pub refine: usize,
    /// Upper end of the spatial comparison window; 90% of the smaller
    /// domain when absent.
    pub x_cut: Option<f64>,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            compare: false,
            x_max: None,
            cells: 3000,
            refine: 4,
            x_cut: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    /// Domain half-width for the estimate ensemble.
    pub l: f64,
    /// Temporal half-span of the symmetric time axis.
    pub t_span: f64,
    /// Nodes on the time axis (even).
    pub time_steps: usize,
    /// Spatial resolutions to sweep (even, ascending).
    pub sizes: Vec<usize>,
    /// Random draws per resolution.
    pub seeds: usize,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            l: 15.0,
            t_span: 0.5,
            time_steps: 768,
            sizes: vec![64, 128, 256],
            seeds: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoothingSection {
    /// Lower end of the tail-threshold sweep.
    pub lambda_lo: f64,
    /// Upper end of the tail-threshold sweep.
    pub lambda_hi: f64,
    /// Number of thresholds (geometrically spaced).
    pub lambda_count: usize,
}

impl Default for SmoothingSection {
    fn default() -> Self {
        SmoothingSection {
            lambda_lo: 2.0,
            lambda_hi: 10.0,
            lambda_count: 7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    /// Number of random problems.
    pub seeds: usize,
    /// Target dispersive-data norm (H^s0).
    pub norm_u: f64,
    /// Target combined wave-data norm (H^s1 + H^(s1-1)).
    pub norm_wave: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seeds: 12,
            norm_u: 0.8,
            norm_wave: 0.8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Write trajectory CSVs next to the report.
    pub trajectories: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { trajectories: true }
    }
}

impl RunConfig {
    /// Structural validation; pure, so a failure never leaves artifacts.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(g.l.is_finite() && g.l > 0.0) {
            bail!("grid.l must be positive");
        }
        if g.n < 8 || g.n % 2 != 0 {
            bail!("grid.n must be even and at least 8");
        }

        let t = &self.time;
        if !(t.dt.is_finite() && t.dt > 0.0) {
            bail!("time.dt must be positive");
        }
        if !(t.t_final.is_finite() && t.t_final > 0.0) {
            bail!("time.t_final must be positive");
        }
        if !on_grid(t.t_final, t.dt) {
            bail!("time.t_final must be an integer multiple of time.dt");
        }
        if !(t.c_t > 0.0 && t.c_t <= 0.5) {
            bail!("time.c_t must lie in (0, 1/2]");
        }
        if let Some(tw) = t.t_window {
            if !(tw.is_finite() && tw >= 2.0 * t.dt) {
                bail!("time.t_window must be at least 2 * dt");
            }
            if !on_grid(tw, t.dt) {
                bail!("time.t_window must be an integer multiple of time.dt");
            }
        }

        let r = &self.regularity;
        if !(r.s0 > -0.25 && r.s0 < 0.5) {
            bail!("regularity.s0 must lie in (-1/4, 1/2)");
        }
        if !(r.s1 > -0.5 && r.s1 < 0.5) {
            bail!("regularity.s1 must lie in (-1/2, 1/2)");
        }
        if !(r.b > 0.0 && r.b < 0.5) {
            bail!("regularity.b must lie in (0, 1/2)");
        }
        if !(0.0..=1.0).contains(&r.a0) || !(0.0..=1.0).contains(&r.a1) {
            bail!("regularity.a0 and a1 must lie in [0, 1]");
        }

        let tol = &self.tolerances;
        for (name, v) in [
            ("rel_l2", tol.rel_l2),
            ("trace_frac", tol.trace_frac),
            ("t0", tol.t0),
            ("picard_ratio", tol.picard_ratio),
            ("ext_agree", tol.ext_agree),
            ("ensemble_slope", tol.ensemble_slope),
            ("slope_gap_margin", tol.slope_gap_margin),
        ] {
            if !(v.is_finite() && v > 0.0) {
                bail!("tolerances.{name} must be positive");
            }
        }
        if tol.picard_iters == 0 {
            bail!("tolerances.picard_iters must be at least 1");
        }
        for (name, v) in [
            ("drift", tol.drift),
            ("even_global", tol.even_global),
            ("fit_resid_frac", tol.fit_resid_frac),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    bail!("tolerances.{name} must be positive when set");
                }
            }
        }

        let p = &self.picard;
        if !(p.tol.is_finite() && p.tol > 0.0) {
            bail!("picard.tol must be positive");
        }
        if p.max_iter == 0 {
            bail!("picard.max_iter must be at least 1");
        }
        if !(p.skip_rel.is_finite() && p.skip_rel >= 0.0) {
            bail!("picard.skip_rel must be nonnegative");
        }

        self.kernel
            .to_core()
            .validate()
            .map_err(|e| anyhow!("kernel: {e}"))?;

        let fd = &self.fd;
        if fd.cells < 16 {
            bail!("fd.cells must be at least 16");
        }
        if fd.refine == 0 {
            bail!("fd.refine must be at least 1");
        }
        if let Some(x) = fd.x_max {
            if !(x.is_finite() && x > 0.0) {
                bail!("fd.x_max must be positive when set");
            }
        }
        if let Some(x) = fd.x_cut {
            if !(x.is_finite() && x > 0.0) {
                bail!("fd.x_cut must be positive when set");
            }
        }

        let e = &self.ensemble;
        if !(e.l.is_finite() && e.l > 0.0) {
            bail!("ensemble.l must be positive");
        }
        if !(e.t_span.is_finite() && e.t_span > 0.0) {
            bail!("ensemble.t_span must be positive");
        }
        if e.time_steps < 8 || e.time_steps % 2 != 0 {
            bail!("ensemble.time_steps must be even and at least 8");
        }
        if e.sizes.is_empty() {
            bail!("ensemble.sizes must not be empty");
        }
        for &s in &e.sizes {
            if s < 8 || s % 2 != 0 {
                bail!("ensemble.sizes entries must be even and at least 8");
            }
        }
        if e.seeds == 0 {
            bail!("ensemble.seeds must be at least 1");
        }
        // The largest spatial frequency squared must stay inside the temporal
        // band, or the dispersive curve aliases in the 2-D transform.
        let max_n = *e.sizes.iter().max().unwrap();
        let xi_max = std::f64::consts::PI * (max_n / 2) as f64 / e.l;
        let tau_max = std::f64::consts::PI * (e.time_steps / 2) as f64 / e.t_span;
        if xi_max * xi_max > tau_max {
            bail!(
                "ensemble aliasing: xi_max^2 = {:.1} exceeds tau_max = {:.1}; \
                 raise time_steps or shrink sizes",
                xi_max * xi_max,
                tau_max
            );
        }

        let sm = &self.smoothing;
        if !(sm.lambda_lo.is_finite() && sm.lambda_lo > 0.0 && sm.lambda_hi > sm.lambda_lo) {
            bail!("smoothing thresholds must satisfy 0 < lambda_lo < lambda_hi");
        }
        if sm.lambda_count < 3 {
            bail!("smoothing.lambda_count must be at least 3");
        }

        if let Some(s) = &self.suite {
            if s.seeds == 0 {
                bail!("suite.seeds must be at least 1");
            }
            if !(s.norm_u.is_finite() && s.norm_u > 0.0) || !(s.norm_wave.is_finite() && s.norm_wave > 0.0)
            {
                bail!("suite norms must be positive");
            }
        }

        self.data.u0.validate("data.u0")?;
        self.data.n0.validate("data.n0")?;
        self.data.n1.validate("data.n1")?;
        self.boundary.g.validate("boundary.g")?;
        self.boundary.h.validate("boundary.h")?;

        Ok(())
    }

    /// Copy with the effective experiment name and output directory filled
    /// in, for embedding into reports.
    pub fn resolved(&self, experiment: &str, out_dir: &Path) -> RunConfig {
        let mut c = self.clone();
        c.experiment = Some(experiment.to_string());
        c.out_dir = Some(out_dir.display().to_string());
        c
    }
}

/// Whether `t` sits on the `dt` grid (up to rounding).
pub fn on_grid(t: f64, dt: f64) -> bool {
    let ratio = t / dt;
    (ratio - ratio.round()).abs() <= 1e-6 * ratio.max(1.0) && ratio.round() >= 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_valid_and_default() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.grid.n, 256);
        assert_eq!(cfg.time.dt, 1e-3);
        assert_eq!(cfg.tolerances.rel_l2, 5e-2);
        assert!(cfg.suite.is_none());
        assert!(cfg.tolerances.drift.is_none());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(toml::from_str::<RunConfig>("banana = 1").is_err());
        assert!(toml::from_str::<RunConfig>("[grid]\nl = 10.0\nresolution = 4").is_err());
    }

    #[test]
    fn structural_errors_are_caught() {
        let mut cfg = RunConfig::default();
        cfg.grid.n = 13;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.time.t_final = 0.5 + 0.3e-3;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.time.c_t = 0.7;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.regularity.s0 = 0.75;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.ensemble.time_steps = 64; // 256 modes on l = 15 alias badly
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn gaussian_extensions_have_the_declared_symmetry() {
        let grid = SpatialGrid::new(10.0, 128);
        let spec = FieldSpec::Gaussian {
            amp: 0.5,
            center: 3.0,
            width: 1.0,
            extension: ExtensionKind::Odd,
        };
        let f = spec.build(grid, 1, Path::new(".")).unwrap();
        let o = grid.origin_index();
        for j in 1..grid.n() / 2 {
            let sum = f.values[o + j] + f.values[o - j];
            assert!(sum.norm() < 1e-14);
        }
        assert_eq!(f.values[o], Complex64::new(0.0, 0.0));

        let zero = spec.with_extension(ExtensionKind::Zero).unwrap();
        let f = zero.build(grid, 1, Path::new(".")).unwrap();
        for j in 1..grid.n() / 2 {
            assert_eq!(f.values[o - j], Complex64::new(0.0, 0.0));
        }
        assert!(f.values[o + 38].norm() > 0.0);
    }

    #[test]
    fn rough_field_is_deterministic_and_hits_its_norm() {
        let grid = SpatialGrid::new(10.0, 128);
        let spec = FieldSpec::RoughSobolev {
            norm: 0.8,
            norm_s: 0.25,
            decay: 0.75,
            band: Some(8.0),
            seed_salt: 3,
            real: false,
            odd: false,
        };
        let a = spec.build(grid, 42, Path::new(".")).unwrap();
        let b = spec.build(grid, 42, Path::new(".")).unwrap();
        assert_eq!(a.values, b.values);
        assert!((sobolev_norm(&a, 0.25) - 0.8).abs() < 1e-12);

        let c = spec.build(grid, 43, Path::new(".")).unwrap();
        assert!(a.sub(&c).sup_norm() > 1e-6);

        // Band cutoff: no energy beyond the requested frequency.
        let spec_a = kgs_core::grid::forward(&a);
        for k in 0..grid.n() {
            if grid.xi(k).abs() > 8.0 {
                assert!(spec_a.coeffs[k].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn real_rough_field_is_real() {
        let grid = SpatialGrid::new(10.0, 64);
        let spec = FieldSpec::RoughSobolev {
            norm: 0.4,
            norm_s: 0.25,
            decay: 0.75,
            band: None,
            seed_salt: 0,
            real: true,
            odd: false,
        };
        let f = spec.build(grid, 9, Path::new(".")).unwrap();
        assert_eq!(f.imag_sup(), 0.0);
        assert!((sobolev_norm(&f, 0.25) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn odd_rough_field_has_zero_trace_and_requested_norm() {
        let grid = SpatialGrid::new(10.0, 64);
        let spec = FieldSpec::RoughSobolev {
            norm: 0.5,
            norm_s: 0.25,
            decay: 0.75,
            band: Some(5.0),
            seed_salt: 1,
            real: true,
            odd: true,
        };
        let f = spec.build(grid, 9, Path::new(".")).unwrap();
        assert_eq!(f.value_at_origin(), Complex64::new(0.0, 0.0));
        assert!(f.even_part().sup_norm() < 1e-12);
        assert!((sobolev_norm(&f, 0.25) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wave_trace_signal_must_be_real() {
        let spec = SignalSpec::RotorRamp {
            amp: 1.0,
            omega: 2.0,
            ramp: 4.0,
        };
        assert!(spec.build_real(Path::new(".")).is_err());
        assert!(spec.build_complex(Path::new(".")).is_ok());
    }

    #[test]
    fn signal_presets_start_flat() {
        let g = SignalSpec::PolyExp {
            amp: 1.0,
            power: 2,
            rate: 1.0,
        }
        .build_complex(Path::new("."))
        .unwrap();
        assert_eq!(g(0.0), Complex64::new(0.0, 0.0));
        assert!((g(1.0).re - (-1.0f64).exp()).abs() < 1e-15);

        let h = SignalSpec::SineRamp {
            amp: 0.4,
            omega: 6.0,
            ramp: 8.0,
        }
        .build_real(Path::new("."))
        .unwrap();
        assert_eq!(h(0.0), 0.0);
        assert!(h(0.3).abs() > 1e-3);

        let p = SignalSpec::SineExp {
            amp: 0.25,
            omega: 16.0,
            rate: 0.6,
        }
        .build_real(Path::new("."))
        .unwrap();
        assert_eq!(p(0.0), 0.0);
        let expected = 0.25 * (0.6 * 0.5f64).exp() * (16.0 * 0.5f64).sin();
        assert!((p(0.5) - expected).abs() < 1e-15);
    }

    #[test]
    fn csv_signal_interpolates_and_vanishes_outside() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sig.csv");
        std::fs::write(&path, "t,re\n0.0,0.0\n0.1,1.0\n0.2,0.0\n").unwrap();
        let spec = SignalSpec::Csv {
            path: "sig.csv".into(),
        };
        let f = spec.build_complex(dir.path()).unwrap();
        assert!((f(0.05).re - 0.5).abs() < 1e-12);
        assert_eq!(f(5.0), Complex64::new(0.0, 0.0));
        assert_eq!(f(-1.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn csv_field_roundtrips_through_restriction() {
        let grid = SpatialGrid::new(10.0, 64);
        let bump = Field::from_fn(grid, |x| {
            Complex64::new(0.3 * (-(x - 4.0f64).powi(2)).exp(), 0.0)
        });
        let profile = kgs_core::halfline::restrict(&bump);
        let mut text = String::from("x,re,im\n");
        for (j, v) in profile.values.iter().enumerate() {
            text.push_str(&format!("{},{},{}\n", j as f64 * profile.dx, v.re, v.im));
        }
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("f.csv"), text).unwrap();
        let spec = FieldSpec::Csv {
            path: "f.csv".into(),
            extension: ExtensionKind::Zero,
        };
        let f = spec.build(grid, 1, dir.path()).unwrap();
        let o = grid.origin_index();
        for j in 0..grid.n() / 2 {
            assert!((f.values[o + j] - bump.values[o + j]).norm() < 1e-9);
        }
    }

    #[test]
    fn resolved_config_echoes_effective_choices() {
        let cfg = RunConfig::default();
        let r = cfg.resolved("global-solve", Path::new("runs/x"));
        assert_eq!(r.experiment.as_deref(), Some("global-solve"));
        assert_eq!(r.out_dir.as_deref(), Some("runs/x"));
    }
}
