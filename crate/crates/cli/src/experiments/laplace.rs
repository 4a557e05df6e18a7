//! Discounted exit functionals of the radial walk on a segment, checked
//! against the sinh/cosh closed forms: exit up before down, down before up
//! (both from an interior start), and the symmetric two-sided exit from the
//! midpoint. Each estimate must sit within 1% relative of its closed form.

use walsh_core::bm_exit_laplace;
use walsh_core::montecarlo::{exit_laplace_estimate, SimConfig};

use crate::config::{CliError, LaplaceConfig};
use crate::rows::ResultRow;

const RELATIVE_GATE: f64 = 0.01;

pub fn rows(cfg: &LaplaceConfig) -> Result<Vec<ResultRow>, CliError> {
    let sim = SimConfig {
        dt: cfg.dt,
        horizon: 1.0,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        kappa: None,
        outer_radius: None,
    };
    let estimate = exit_laplace_estimate(cfg.r, cfg.a, cfg.lambda, &sim)?;
    let (up, down, through) = bm_exit_laplace(cfg.r, cfg.a, cfg.lambda)?;
    let params = format!(
        "r={};a={};lambda={};dt={};n_paths={};seed={}",
        cfg.r, cfg.a, cfg.lambda, cfg.dt, cfg.n_paths, cfg.seed
    );

    let triples = [
        ("discounted_exit_up", estimate.up, estimate.up_se, up),
        ("discounted_exit_down", estimate.down, estimate.down_se, down),
        (
            "discounted_exit_through",
            estimate.through,
            estimate.through_se,
            through,
        ),
    ];
    Ok(triples
        .into_iter()
        .map(|(metric, value, se, oracle)| {
            let mut row = ResultRow::new(metric, value)
                .se(se)
                .oracle(oracle)
                .gate((value - oracle).abs() <= RELATIVE_GATE * oracle.abs());
            row.params = params.clone();
            row
        })
        .collect())
}
