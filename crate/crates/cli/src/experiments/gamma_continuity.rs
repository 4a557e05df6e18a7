//! Continuity of the elastic resolvent in its resistance parameter.
//!
//! Two sweeps: `gamma_n = 1 + 2^-n` must converge geometrically to the
//! `gamma = 1` resolvent (successive distance ratios below `ratio_gate`),
//! and a single huge resistance — coupling `1/(2 gamma)` — must already sit
//! on the decoupled (reflecting) resolvent within 1e-6 relative.

use std::path::Path;

use walsh_core::{
    gamma_continuity_sweep, AngularMeasure, DiscreteFunction, GammaSweep, Grid, OriginMode,
};

use crate::config::{CliError, GammaContinuityConfig};
use crate::rows::{ResultRow, SCHEMA_VERSION};

const REFLECTING_RELATIVE_GATE: f64 = 1e-6;

fn sweep_table(sweep: &GammaSweep) -> String {
    let mut out = format!("# schema=gamma-table/{SCHEMA_VERSION}\n");
    out.push_str("gamma_bar,kappa,norm,lambda,grid_h,grid_L,M\n");
    for row in &sweep.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.gamma_bar, row.kappa, row.norm, sweep.lambda, sweep.grid_h, sweep.grid_l, sweep.n_rays
        ));
    }
    out
}

pub fn rows(cfg: &GammaContinuityConfig, out_dir: &Path) -> Result<Vec<ResultRow>, CliError> {
    if cfg.steps < 2 {
        return Err(CliError::Config(
            "continuity sweep needs at least two steps".into(),
        ));
    }
    let grid = Grid::new(cfg.n_rays, cfg.nodes_per_ray, cfg.spacing)?;
    let measure = AngularMeasure::uniform(cfg.n_rays)?;
    let g = DiscreteFunction::from_fn(&grid, OriginMode::PerRay, |j, r| {
        (-r).exp() + if j % 2 == 0 { 0.3 } else { -0.3 } * (-2.0 * r).exp()
    })?;

    let gammas: Vec<f64> = (1..=cfg.steps).map(|n| 1.0 + 0.5f64.powi(n as i32)).collect();
    let sweep = gamma_continuity_sweep(&gammas, 1.0, cfg.lambda, &g, &grid, &measure)?;
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(
        out_dir.join("gamma-continuity.table.csv"),
        sweep_table(&sweep),
    )?;

    let geometry = format!(
        "lambda={};grid_h={};grid_N={};M={}",
        cfg.lambda, cfg.spacing, cfg.nodes_per_ray, cfg.n_rays
    );
    let mut out = Vec::new();
    for row in &sweep.rows {
        let mut context = ResultRow::new("resolvent_distance", row.norm);
        context.params = format!(
            "gamma_bar={};kappa={};gamma_limit=1;{geometry}",
            row.gamma_bar, row.kappa
        );
        out.push(context);
    }

    let norms: Vec<f64> = sweep.rows.iter().map(|r| r.norm).collect();
    let max_ratio = norms
        .windows(2)
        .map(|pair| pair[1] / pair[0])
        .fold(0.0, f64::max);
    let mut geometric = ResultRow::new("max_successive_ratio", max_ratio)
        .se(cfg.ratio_gate)
        .gate(max_ratio < cfg.ratio_gate);
    geometric.params = format!("gammas=1+2^-n;n=1..{};{geometry}", cfg.steps);
    out.push(geometric);

    let reflecting = gamma_continuity_sweep(
        &[cfg.reflecting_gamma],
        f64::INFINITY,
        cfg.lambda,
        &g,
        &grid,
        &measure,
    )?;
    let relative = reflecting.rows[0].norm / reflecting.limit_resolvent_norm;
    let mut decoupled = ResultRow::new("reflecting_relative_distance", relative)
        .se(reflecting.limit_resolvent_norm)
        .gate(relative < REFLECTING_RELATIVE_GATE);
    decoupled.params = format!(
        "gamma_bar={};kappa={};gamma_limit=inf;{geometry}",
        cfg.reflecting_gamma, reflecting.rows[0].kappa
    );
    out.push(decoupled);
    Ok(out)
}
