//! Watching the glued walk only outside a sphere reproduces the elastic walk.
//!
//! The glued walk is run on the full star and observed only while `r >= a`,
//! with the time inside excised and the radius shifted by `a`; its
//! first-passage times (in the watched clock) from `a + start_offset` to
//! `a + target_offset` are compared against the radial first-passage times
//! of the elastic walk from `start_offset` to `target_offset`. The matched
//! elastic coupling is `1/(2a)`; it only redirects rays at the origin, so
//! the radial law carries the whole comparison.

use walsh_core::montecarlo::{
    ks_two_sample, radial_first_passage_times, trace_first_passage_times, SimConfig,
};
use walsh_core::AngularMeasure;

use super::fmt_list;
use crate::config::{CliError, TraceVsSnowbConfig};
use crate::rows::ResultRow;

pub fn rows(cfg: &TraceVsSnowbConfig) -> Result<Vec<ResultRow>, CliError> {
    let measure = AngularMeasure::from_weights(cfg.weights.clone())?;
    let a = cfg.sphere_radius;
    if !(a > 0.0) || !a.is_finite() {
        return Err(CliError::Config(format!(
            "sphere radius must be positive and finite, got {a}"
        )));
    }
    let trace_sim = SimConfig {
        dt: cfg.dt,
        horizon: 1.0,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        kappa: None,
        outer_radius: None,
    };
    let mut trace_times = trace_first_passage_times(
        a + cfg.start_offset,
        a,
        a + cfg.target_offset,
        &measure,
        &trace_sim,
    )?;
    let radial_sim = SimConfig {
        seed: cfg.seed + 1,
        ..trace_sim
    };
    let mut radial_times =
        radial_first_passage_times(cfg.start_offset, cfg.target_offset, &radial_sim)?;

    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let trace_mean = mean(&trace_times);
    let radial_mean = mean(&radial_times);
    let ks = ks_two_sample(&mut trace_times, &mut radial_times);

    let params = format!(
        "a={};start_offset={};target_offset={};matched_kappa={};dt={};n_paths={};seed={};weights={}",
        a,
        cfg.start_offset,
        cfg.target_offset,
        0.5 / a,
        cfg.dt,
        cfg.n_paths,
        cfg.seed,
        fmt_list(&cfg.weights)
    );
    // mean first-passage time of the reflected radius: target^2 - start^2
    let mean_oracle = cfg.target_offset.powi(2) - cfg.start_offset.powi(2);
    let mut out = vec![
        ResultRow::new("first_passage_ks", ks).gate(ks < cfg.ks_gate),
        ResultRow::new("trace_mean_passage_time", trace_mean).oracle(mean_oracle),
        ResultRow::new("radial_mean_passage_time", radial_mean).oracle(mean_oracle),
    ];
    for row in &mut out {
        row.params = params.clone();
    }
    Ok(out)
}
