//! Rebirth bookkeeping of the elastically killed walk.
//!
//! Each path starts at the origin and runs to the horizon; rebirths consume
//! exponential local-time budgets of mean `1/kappa`. Three facts are gated:
//!
//! - rebirth rays follow the angular measure (chi-square);
//! - the consumed budget per rebirth averages `1/kappa` — estimated by the
//!   renewal-consistent ratio `total local time / total rebirths`, which is
//!   free of the length bias that plagues per-window or first-rebirth
//!   collection (waiting for a first rebirth has infinite expected time, and
//!   budgets completed inside a fixed window are stochastically smaller than
//!   a typical budget);
//! - the Gaussian local-time accumulator agrees with an independent lattice
//!   random-walk oracle that never touches the Gaussian step kernels.
//!
//! The ratio's standard error comes from the delta method: with per-path
//! local time `l_i` and rebirth count `n_i`, the residuals `l_i - ratio*n_i`
//! are mean-zero, and `SE = sd(residual) / (sqrt(paths) * mean(n))`.

use walsh_core::montecarlo::{
    path_stream, reflected_rw_mean_local_time, snowb_mean_local_time, SimConfig, SnowbStepper,
    WalkerState,
};
use walsh_core::{AngularMeasure, StarPoint};

use super::{fmt_list, measure_chi_square_p};
use crate::config::{CliError, SnowbRebirthConfig};
use crate::rows::ResultRow;

const MIN_REBIRTHS: f64 = 10_000.0;
const ACCUMULATOR_RELATIVE_GATE: f64 = 0.02;

pub fn rows(cfg: &SnowbRebirthConfig) -> Result<Vec<ResultRow>, CliError> {
    let measure = AngularMeasure::from_weights(cfg.weights.clone())?;
    let sim = SimConfig {
        dt: cfg.dt,
        horizon: cfg.horizon,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        kappa: Some(cfg.kappa),
        outer_radius: None,
    };
    sim.validate()?;
    let stepper = SnowbStepper::new(&measure, cfg.kappa, cfg.dt)?;
    let n_steps = sim.n_steps();

    let mut ray_counts = vec![0u64; measure.n_rays()];
    let mut per_path = Vec::with_capacity(cfg.n_paths);
    for i in 0..cfg.n_paths as u64 {
        let mut rng = path_stream(cfg.seed, i);
        let mut state = WalkerState {
            point: StarPoint { ray: 0, r: 0.0 },
            clock: 0.0,
            local_time: 0.0,
            kill_threshold: stepper.fresh_budget(&mut rng),
        };
        let mut rebirths = Vec::new();
        for _ in 0..n_steps {
            stepper.step(&mut state, &mut rng, &mut rebirths);
        }
        let consumed: f64 = rebirths.iter().map(|r| r.local_time_at_death).sum();
        for rebirth in &rebirths {
            ray_counts[rebirth.ray] += 1;
        }
        per_path.push((consumed + state.local_time, rebirths.len() as f64));
    }

    let params = format!(
        "kappa={};dt={};horizon={};n_paths={};seed={};weights={}",
        cfg.kappa,
        cfg.dt,
        cfg.horizon,
        cfg.n_paths,
        cfg.seed,
        fmt_list(&cfg.weights)
    );
    let mut out = Vec::new();

    let total_local: f64 = per_path.iter().map(|p| p.0).sum();
    let total_rebirths: f64 = per_path.iter().map(|p| p.1).sum();
    // E[local time by T from the origin] = 2 sqrt(2T/pi), one budget of mean
    // 1/kappa per rebirth
    let expected_rebirths = cfg.kappa
        * 2.0
        * (2.0 * cfg.horizon / std::f64::consts::PI).sqrt()
        * cfg.n_paths as f64;
    out.push(
        ResultRow::new("rebirth_count", total_rebirths)
            .oracle(expected_rebirths)
            .gate(total_rebirths >= MIN_REBIRTHS),
    );

    let (statistic, p_value) = measure_chi_square_p(&ray_counts, measure.weights())?;
    out.push(
        ResultRow::new("rebirth_ray_pvalue", p_value)
            .se(statistic)
            .gate(p_value > 0.01),
    );

    let n = per_path.len() as f64;
    let ratio = total_local / total_rebirths;
    let mean_count = total_rebirths / n;
    let residual_var = per_path
        .iter()
        .map(|&(l, k)| (l - ratio * k).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    let se = (residual_var / n).sqrt() / mean_count;
    let target = 1.0 / cfg.kappa;
    out.push(
        ResultRow::new("mean_local_time_at_death", ratio)
            .se(se)
            .oracle(target)
            .gate((ratio - target).abs() <= 3.0 * se),
    );

    let accumulator = snowb_mean_local_time(
        0.0,
        &SimConfig {
            dt: cfg.accumulator_dt,
            horizon: cfg.oracle_horizon,
            n_paths: cfg.accumulator_paths,
            seed: cfg.seed + 1,
            kappa: None,
            outer_radius: None,
        },
    )?;
    let oracle = reflected_rw_mean_local_time(
        0.0,
        cfg.oracle_horizon,
        cfg.oracle_grid_h,
        cfg.oracle_replications,
        cfg.seed + 2,
    )?;
    let relative = (accumulator - oracle).abs() / oracle;
    let mut cross = ResultRow::new("accumulator_vs_lattice_oracle", accumulator)
        .se(relative)
        .oracle(oracle)
        .gate(relative < ACCUMULATOR_RELATIVE_GATE);
    cross.params = format!(
        "horizon={};accumulator_dt={};accumulator_paths={};oracle_grid_h={};oracle_replications={};seed={}",
        cfg.oracle_horizon,
        cfg.accumulator_dt,
        cfg.accumulator_paths,
        cfg.oracle_grid_h,
        cfg.oracle_replications,
        cfg.seed
    );

    for row in &mut out {
        row.params = params.clone();
    }
    out.push(cross);
    Ok(out)
}
