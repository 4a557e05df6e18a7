//! Collapsing the elastic walk's separated origins recovers the glued walk.
//!
//! The elastic walk starts in equilibrium at the origin; its image under the
//! collapse (keep the ray mark and radius, forget which origin copy) must
//! have the glued walk's horizon law for every killing rate: half-normal
//! radius, angular-measure ray, and no dependence on the rate at all. The
//! rate only relabels origin copies, which the collapse erases.

use std::path::Path;

use walsh_core::montecarlo::{
    ks_statistic, ks_two_sample, normal_cdf, snowb_darned_marginal, snowb_path, SimConfig,
};
use walsh_core::{AngularMeasure, StarPoint};

use super::{fmt_list, measure_chi_square_p, resolve_artifact};
use crate::config::{CliError, DarningConfig};
use crate::rows::ResultRow;

const CROSS_RATE_KS_GATE: f64 = 0.01;

pub fn rows(cfg: &DarningConfig, out_dir: &Path) -> Result<Vec<ResultRow>, CliError> {
    let measure = AngularMeasure::from_weights(cfg.weights.clone())?;
    if cfg.kappas.is_empty() {
        return Err(CliError::Config("kappas must be nonempty".into()));
    }
    let half_normal = {
        let sigma = cfg.horizon.sqrt();
        move |x: f64| 2.0 * normal_cdf(x / sigma) - 1.0
    };

    let mut out = Vec::new();
    let mut first_radii: Option<Vec<f64>> = None;
    let mut last_radii: Vec<f64> = Vec::new();
    for (index, &kappa) in cfg.kappas.iter().enumerate() {
        let sim = SimConfig {
            dt: cfg.dt,
            horizon: cfg.horizon,
            n_paths: cfg.n_paths,
            seed: cfg.seed + index as u64,
            kappa: Some(kappa),
            outer_radius: None,
        };
        let points = snowb_darned_marginal(&measure, &sim)?;
        let mut radii: Vec<f64> = points.iter().map(|p| p.r).collect();
        let mut ray_counts = vec![0u64; measure.n_rays()];
        for point in &points {
            ray_counts[point.ray] += 1;
        }

        let params = format!(
            "kappa={};horizon={};dt={};n_paths={};seed={};weights={}",
            kappa,
            cfg.horizon,
            cfg.dt,
            cfg.n_paths,
            sim.seed,
            fmt_list(&cfg.weights)
        );
        let ks = ks_statistic(&mut radii, half_normal);
        let mut radial = ResultRow::new("radial_half_normal_ks", ks).gate(ks < cfg.radial_ks_gate);
        radial.params = params.clone();
        out.push(radial);

        let (statistic, p_value) = measure_chi_square_p(&ray_counts, measure.weights())?;
        let mut rays = ResultRow::new("ray_pvalue", p_value)
            .se(statistic)
            .gate(p_value > 0.01);
        rays.params = params;
        out.push(rays);

        if index == 0 {
            first_radii = Some(radii);
        } else if index == cfg.kappas.len() - 1 {
            last_radii = radii;
        }
    }

    if cfg.kappas.len() >= 2 {
        let mut first = first_radii.expect("set on index 0");
        let cross = ks_two_sample(&mut first, &mut last_radii);
        let mut row = ResultRow::new("cross_rate_ks", cross).gate(cross < CROSS_RATE_KS_GATE);
        row.params = format!(
            "kappa_low={};kappa_high={};n_paths={}",
            cfg.kappas[0],
            cfg.kappas[cfg.kappas.len() - 1],
            cfg.n_paths
        );
        out.push(row);
    }

    if let Some(path) = &cfg.dump_paths {
        let sim = SimConfig {
            dt: cfg.dt,
            horizon: cfg.horizon,
            n_paths: cfg.n_paths,
            seed: cfg.seed,
            kappa: Some(cfg.kappas[0]),
            outer_radius: None,
        };
        let count = cfg.dump_count.max(1).min(cfg.n_paths);
        let mut paths = Vec::with_capacity(count);
        for i in 0..count {
            let (sample, _) = snowb_path(StarPoint { ray: 0, r: 0.0 }, &measure, &sim, i as u64)?;
            paths.push(sample);
        }
        let mut file = std::fs::File::create(resolve_artifact(out_dir, path)?)?;
        walsh_core::montecarlo::write_path_dump(&mut file, &paths)?;
        let mut row = ResultRow::new("dumped_paths", count as f64);
        row.params = format!("kappa={}", cfg.kappas[0]);
        out.push(row);
    }

    Ok(out)
}
