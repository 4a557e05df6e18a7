//! The sphere-pair coupling weight as a large-rate limit.
//!
//! The boundary pairing of the killed resolvent against harmonic extensions
//! from the sphere of radius `a` rises to the flux weight `1/(2a)` as the
//! rate grows. Two gates per rate: the quadrature route must agree with the
//! independent closed form (dual-route check), and past `gate_from` the
//! pairing scaled by the mean boundary profiles must sit within `tolerance`
//! of its limit.

use walsh_core::{feller_lambda_pairing, feller_lambda_pairing_exact, feller_pair_weight};
use walsh_core::AngularMeasure;

use super::fmt_list;
use crate::config::{CliError, FellerConfig};
use crate::rows::ResultRow;

const DUAL_ROUTE_GATE: f64 = 1e-5;

pub fn rows(cfg: &FellerConfig) -> Result<Vec<ResultRow>, CliError> {
    let measure = AngularMeasure::from_weights(cfg.weights.clone())?;
    for (name, values) in [("phi", &cfg.phi), ("psi", &cfg.psi)] {
        if values.len() != measure.n_rays() {
            return Err(CliError::Config(format!(
                "{name} has {} entries for {} rays",
                values.len(),
                measure.n_rays()
            )));
        }
    }
    let phi_bar = measure.average(&cfg.phi);
    let psi_bar = measure.average(&cfg.psi);
    let scale = phi_bar * psi_bar;
    let weight = feller_pair_weight(cfg.a)?;

    let mut out = Vec::new();
    for &lambda in &cfg.lambdas {
        let params = format!(
            "a={};lambda={};panels={};phi_bar={};psi_bar={}",
            cfg.a, lambda, cfg.panels, phi_bar, psi_bar
        );
        let quadrature = feller_lambda_pairing(cfg.a, lambda, cfg.panels)?;
        let exact = feller_lambda_pairing_exact(cfg.a, lambda)?;

        let gap = (quadrature - weight).abs() * scale.abs();
        let mut pairing = ResultRow::new("scaled_pairing", quadrature * scale)
            .se(gap)
            .oracle(weight * scale);
        if lambda >= cfg.gate_from {
            pairing = pairing.gate(gap <= cfg.tolerance);
        }
        pairing.params = params.clone();
        out.push(pairing);

        let residual = (quadrature - exact).abs();
        let mut dual = ResultRow::new("quadrature_vs_closed_form", quadrature)
            .se(residual)
            .oracle(exact)
            .gate(residual <= DUAL_ROUTE_GATE);
        dual.params = params;
        out.push(dual);
    }

    let mut limit = ResultRow::new("pair_weight_limit", weight * scale).oracle(weight * scale);
    limit.params = format!(
        "a={};weights={};phi={};psi={}",
        cfg.a,
        fmt_list(&cfg.weights),
        fmt_list(&cfg.phi),
        fmt_list(&cfg.psi)
    );
    out.push(limit);
    Ok(out)
}
