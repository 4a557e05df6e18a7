//! The thin-collar lattice walk against the elastic walk at matched coupling.
//!
//! A uniform collar of width `epsilon` and resistance `gamma_bar` is walked
//! on a lattice of spacing `grid_h`; the elastic walk runs at the coupling
//! `kappa = 1/(2 gamma_bar)` the collar selects in the thin limit. Both
//! first-passage chains from `start_r` to `absorb_r` must agree on the
//! same-ray escape odds `(1 + 2 kappa r)/(1 + 2 kappa a)`, on the exit-time
//! law, and on the rebirth-ray law.

use walsh_core::montecarlo::stats::binomial_se;
use walsh_core::montecarlo::{
    barrier_exit_chain, ks_two_sample, snowb_exit_chain, ExitKind, JumpChainSample, SimConfig,
};
use walsh_core::{AngularMeasure, BarrierProfile, StarPoint};

use super::{fmt_list, measure_chi_square_p};
use crate::config::{BarrierVsSnowbConfig, CliError};
use crate::rows::ResultRow;

const ESCAPE_SIGMA: f64 = 3.5;

fn same_ray_fraction(chain: &JumpChainSample) -> f64 {
    let same = chain
        .records
        .iter()
        .filter(|r| r.kind == ExitKind::SameRay)
        .count();
    same as f64 / chain.records.len() as f64
}

fn rebirth_ray_counts(chain: &JumpChainSample, n_rays: usize) -> Vec<u64> {
    let mut counts = vec![0u64; n_rays];
    for record in &chain.records {
        if record.kind == ExitKind::Rebirth {
            counts[record.exit.ray] += 1;
        }
    }
    counts
}

pub fn rows(cfg: &BarrierVsSnowbConfig) -> Result<Vec<ResultRow>, CliError> {
    let measure = AngularMeasure::from_weights(cfg.weights.clone())?;
    if !(cfg.gamma_bar > 0.0) || !cfg.gamma_bar.is_finite() {
        return Err(CliError::Config(format!(
            "gamma_bar must be positive and finite, got {}",
            cfg.gamma_bar
        )));
    }
    let profile = BarrierProfile::uniform(cfg.epsilon / cfg.gamma_bar, cfg.epsilon)?;
    let kappa = 0.5 / cfg.gamma_bar;
    let start = StarPoint::new(cfg.start_ray, cfg.start_r)?;

    let lattice_sim = SimConfig {
        dt: cfg.grid_h * cfg.grid_h,
        horizon: 1.0,
        n_paths: cfg.lattice_walks,
        seed: cfg.seed,
        kappa: None,
        outer_radius: None,
    };
    let lattice = barrier_exit_chain(
        &profile,
        cfg.grid_h,
        start,
        cfg.absorb_r,
        &measure,
        &lattice_sim,
    )?;

    let elastic_sim = SimConfig {
        dt: cfg.elastic_dt,
        horizon: 1.0,
        n_paths: cfg.elastic_paths,
        seed: cfg.seed + 1,
        kappa: Some(kappa),
        outer_radius: None,
    };
    let elastic = snowb_exit_chain(start, cfg.absorb_r, &measure, &elastic_sim)?;

    // escape odds from the collar's scale function: linear in r outside the
    // collar with intercept set by the resistance, giving
    // (1 + 2 kappa r)/(1 + 2 kappa a) at matched coupling
    let survival = (1.0 + 2.0 * kappa * cfg.start_r) / (1.0 + 2.0 * kappa * cfg.absorb_r);
    let params = format!(
        "epsilon={};gamma_bar={};kappa={};grid_h={};start_ray={};start_r={};absorb_r={};weights={};seed={}",
        cfg.epsilon,
        cfg.gamma_bar,
        kappa,
        cfg.grid_h,
        cfg.start_ray,
        cfg.start_r,
        cfg.absorb_r,
        fmt_list(&cfg.weights),
        cfg.seed
    );

    let mut out = Vec::new();
    for (metric, chain, n) in [
        ("same_ray_mass_lattice", &lattice, cfg.lattice_walks),
        ("same_ray_mass_elastic", &elastic, cfg.elastic_paths),
    ] {
        let fraction = same_ray_fraction(chain);
        let se = binomial_se(survival, n);
        out.push(
            ResultRow::new(metric, fraction)
                .se(se)
                .oracle(survival)
                .gate((fraction - survival).abs() <= ESCAPE_SIGMA * se),
        );
    }

    let mut lattice_times: Vec<f64> = lattice.records.iter().map(|r| r.elapsed).collect();
    let mut elastic_times: Vec<f64> = elastic.records.iter().map(|r| r.elapsed).collect();
    let ks = ks_two_sample(&mut lattice_times, &mut elastic_times);
    out.push(ResultRow::new("elapsed_ks", ks).gate(ks < cfg.ks_gate));

    for (metric, chain) in [
        ("rebirth_ray_pvalue_lattice", &lattice),
        ("rebirth_ray_pvalue_elastic", &elastic),
    ] {
        let counts = rebirth_ray_counts(chain, measure.n_rays());
        let (statistic, p_value) = measure_chi_square_p(&counts, measure.weights())?;
        out.push(
            ResultRow::new(metric, p_value)
                .se(statistic)
                .gate(p_value > 0.01),
        );
    }

    for row in &mut out {
        row.params = params.clone();
    }
    Ok(out)
}
