//! Collar interpolants carry the elastic energy at first order in the grid.
//!
//! The test data is `(+/-1) * exp(-decay * r)` per ray. Its recovered version
//! ramps through the collar along the scale function and continues with the
//! shifted original; the assembled collar energy must approach the continuum
//! reference — the left-rectangle quadrature of the weighted radial energy on
//! `[0, L - epsilon]` plus the exact origin term
//! `(1/(2 gamma_bar)) * sum_j w_j (g_j(0) - c)^2` — with error linear in `h`
//! (the reference's own quadrature bias dominates and is O(h), so the gate
//! checks both smallness at `h` and halving at `h/2`).

use walsh_core::montecarlo::McError;
use walsh_core::{
    form_energy, recovery_sequence, AngularMeasure, BarrierProfile, DiscreteFunction, FormKind,
    Grid, OriginMode,
};

use crate::config::{CliError, RecoveryConfig};
use crate::rows::ResultRow;

const HALVING_RANGE: (f64, f64) = (0.4, 0.6);

pub fn rows(cfg: &RecoveryConfig) -> Result<Vec<ResultRow>, CliError> {
    if !(cfg.gamma_bar > 0.0) || !cfg.gamma_bar.is_finite() {
        return Err(CliError::Config(format!(
            "gamma_bar must be positive and finite, got {}",
            cfg.gamma_bar
        )));
    }
    if !(cfg.epsilon > 0.0) || cfg.epsilon >= cfg.outer_radius {
        return Err(CliError::Config(format!(
            "epsilon must lie inside the truncation radius, got {} vs {}",
            cfg.epsilon, cfg.outer_radius
        )));
    }
    let profile = BarrierProfile::uniform(cfg.epsilon / cfg.gamma_bar, cfg.epsilon)?;
    let measure = AngularMeasure::uniform(cfg.n_rays)?;
    let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let decay = cfg.decay;
    // (g_j')^2 is ray independent: signs square away
    let g_prime_sq = move |r: f64| decay * decay * (-2.0 * decay * r).exp();

    let mut errors = Vec::new();
    let mut out = Vec::new();
    for &h in &[cfg.spacing, cfg.spacing / 2.0] {
        let nodes = (cfg.outer_radius / h).round() as usize + 1;
        let grid = Grid::new(cfg.n_rays, nodes, h)?;
        if !grid.aligns_with(&profile) {
            return Err(CliError::from(McError::LatticeMisaligned(h)));
        }
        let g = DiscreteFunction::from_fn(&grid, OriginMode::PerRay, |j, r| {
            sign(j) * (-decay * r).exp()
        })?;
        let recovered = recovery_sequence(&g, &profile, &grid, &measure)?;
        let energy = form_energy(&FormKind::Barrier(profile.clone()), &recovered, &grid, &measure)?;

        let origins = g.origin_values();
        let c = measure.average(&origins);
        let cells = ((grid.outer_radius() - profile.epsilon()) / h).round() as usize;
        let radial: f64 = (0..cells).map(|i| h * g_prime_sq(i as f64 * h)).sum();
        let collar: f64 = (0.5 / cfg.gamma_bar)
            * origins
                .iter()
                .enumerate()
                .map(|(j, &v)| measure.weight(j) * (v - c).powi(2))
                .sum::<f64>();
        let reference = 0.5 * radial + collar;
        let error = (energy - reference).abs() / reference;
        errors.push(error);

        let mut row = ResultRow::new("recovered_energy", energy)
            .se(error)
            .oracle(reference);
        if h == cfg.spacing {
            row = row.gate(error < cfg.rel_error_gate);
        }
        row.params = format!(
            "h={};epsilon={};gamma_bar={};decay={};outer_radius={};M={}",
            h, cfg.epsilon, cfg.gamma_bar, decay, cfg.outer_radius, cfg.n_rays
        );
        out.push(row);
    }

    let ratio = errors[1] / errors[0];
    let mut halving = ResultRow::new("error_halving_ratio", ratio)
        .gate(ratio >= HALVING_RANGE.0 && ratio <= HALVING_RANGE.1);
    halving.params = format!("h={};h_half={}", cfg.spacing, cfg.spacing / 2.0);
    out.push(halving);
    Ok(out)
}
