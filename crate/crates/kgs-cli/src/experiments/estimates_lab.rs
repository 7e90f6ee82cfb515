//! Randomized stress test of the two bilinear space-time bounds that drive the
//! fixed-point argument: ratios of output to input norms must stay bounded as
//! the spatial resolution grows.

use anyhow::Result;
use kgs_core::bourgain::{
    bilinear_schrodinger_ratios, fitted_slope, wave_coupling_ratios, EnsembleConfig,
    EstimateStats,
};

use super::{Experiment, RunContext};

pub struct EstimatesLab;

impl Experiment for EstimatesLab {
    fn name(&self) -> &'static str {
        "estimates-lab"
    }


    fn run(&self, cx: &mut RunContext) -> Result<()> {
        let cfg = cx.cfg;
        let e = &cfg.ensemble;
        let core = EnsembleConfig {
            l: e.l,
            t_span: e.t_span,
            time_steps: e.time_steps,
            sizes: e.sizes.clone(),
            seeds: e.seeds,
            base_seed: cfg.seed,
            s0: cfg.regularity.s0,
            s1: cfg.regularity.s1,
            b: cfg.regularity.b,
        };

        let bilinear = bilinear_schrodinger_ratios(&core);
        let wave = wave_coupling_ratios(&core);
        let slope_bilinear = fitted_slope(&bilinear);
        let slope_wave = fitted_slope(&wave);

        let record = |cx: &mut RunContext, family: &str, stats: &[EstimateStats]| {
            for s in stats {
                cx.report
                    .metric(&format!("{family}_max_ratio_n{}", s.size), s.max_ratio);
                cx.report
                    .metric(&format!("{family}_mean_ratio_n{}", s.size), s.mean_ratio);
            }
        };
        record(cx, "bilinear", &bilinear);
        record(cx, "wave", &wave);
        cx.report.metric("bilinear_slope", slope_bilinear);
        cx.report.metric("wave_slope", slope_wave);
        cx.report.metric_count("seeds", e.seeds);

        // Boundedness in resolution: the log-log growth rate of the worst
        // ratio must be indistinguishable from flat.
        cx.report
            .check_le("bilinear_slope", slope_bilinear, cfg.tolerances.ensemble_slope);
        cx.report
            .check_le("wave_slope", slope_wave, cfg.tolerances.ensemble_slope);

        let rows = bilinear
            .iter()
            .map(|s| ("bilinear", s))
            .chain(wave.iter().map(|s| ("wave", s)))
            .map(|(family, s)| format!("{family},{},{},{}", s.size, s.max_ratio, s.mean_ratio));
        cx.csv("ratios.csv", "family,size,max_ratio,mean_ratio", rows)?;
        Ok(())
    }
}
