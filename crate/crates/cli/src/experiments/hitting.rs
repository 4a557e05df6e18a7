//! Exit law of the glued star walk through the sphere of radius `a`.
//!
//! From `(ray 0, r)` the first-passage kernel has a same-ray atom `r/a`
//! (paths that never touch the origin) and spreads the remaining `1 - r/a`
//! over the rays by the angular measure. The atom is gated at three binomial
//! standard deviations; the origin-touching exits are gated by a chi-square
//! test against the measure.

use std::path::Path;

use walsh_core::montecarlo::{estimate_hitting, wbm_exit_chain, wbm_path, ExitKind, SimConfig};
use walsh_core::{hitting_kernel, AngularMeasure, StarPoint};

use super::{fmt_list, measure_chi_square_p, resolve_artifact};
use crate::config::{CliError, HittingConfig};
use crate::rows::ResultRow;

pub fn rows(cfg: &HittingConfig, out_dir: &Path) -> Result<Vec<ResultRow>, CliError> {
    let measure = AngularMeasure::from_weights(cfg.weights.clone())?;
    let start = StarPoint::new(0, cfg.r)?;
    let sim = SimConfig {
        dt: cfg.dt,
        horizon: 1.0,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        kappa: None,
        outer_radius: None,
    };
    let chain = wbm_exit_chain(start, cfg.a, &measure, &sim)?;
    let kernel = estimate_hitting(&chain, measure.n_rays())?;
    let oracle = hitting_kernel(cfg.r, cfg.a)?;
    let params = format!(
        "r={};a={};weights={};dt={};n_paths={};seed={}",
        cfg.r,
        cfg.a,
        fmt_list(&cfg.weights),
        cfg.dt,
        cfg.n_paths,
        cfg.seed
    );

    let mut out = Vec::new();
    let bound = 3.0
        * (oracle.same_ray_mass * (1.0 - oracle.same_ray_mass) / cfg.n_paths as f64).sqrt();
    out.push(
        ResultRow::new("same_ray_mass", kernel.atom_mass)
            .se(kernel.atom_se.unwrap_or(0.0))
            .oracle(oracle.same_ray_mass)
            .gate((kernel.atom_mass - oracle.same_ray_mass).abs() <= bound),
    );

    let mut rebirth_counts = vec![0u64; measure.n_rays()];
    for record in &chain.records {
        if record.kind == ExitKind::Rebirth {
            rebirth_counts[record.exit.ray] += 1;
        }
    }
    let (statistic, p_value) = measure_chi_square_p(&rebirth_counts, measure.weights())?;
    out.push(
        ResultRow::new("rebirth_ray_pvalue", p_value)
            .se(statistic)
            .gate(p_value > 0.01),
    );

    for ray in 0..measure.n_rays() {
        let atom = if ray == 0 { oracle.same_ray_mass } else { 0.0 };
        out.push(
            ResultRow::new(format!("exit_mass_ray_{ray}"), kernel.ray_masses[ray])
                .oracle(atom + oracle.eta_mixture_mass * measure.weight(ray)),
        );
    }

    if let Some(path) = &cfg.dump_paths {
        let count = cfg.dump_count.max(1).min(cfg.n_paths);
        let mut paths = Vec::with_capacity(count);
        for i in 0..count {
            paths.push(wbm_path(start, &measure, &sim, i as u64)?);
        }
        let mut file = std::fs::File::create(resolve_artifact(out_dir, path)?)?;
        walsh_core::montecarlo::write_path_dump(&mut file, &paths)?;
        out.push(ResultRow::new("dumped_paths", count as f64));
    }

    for row in &mut out {
        row.params = params.clone();
    }
    Ok(out)
}
