//! Experiment configuration: one tagged JSON document per run.
//!
//! The file carries `{"experiment": "<id>", "params": { ... }}`; every
//! parameter has a registry default, so `"params": {}` runs the stock
//! version of the experiment. Unknown fields are rejected. CLI flags
//! (`--seed`, `--n-paths`) override file values after parsing.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors surfaced to the command line; the variant decides the exit code
/// (configuration 2, internal 3 — gate failures are not errors).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<walsh_core::DomainError> for CliError {
    fn from(e: walsh_core::DomainError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<walsh_core::GridError> for CliError {
    fn from(e: walsh_core::GridError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<walsh_core::FormError> for CliError {
    fn from(e: walsh_core::FormError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<walsh_core::AnalyticError> for CliError {
    fn from(e: walsh_core::AnalyticError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<walsh_core::montecarlo::McError> for CliError {
    fn from(e: walsh_core::montecarlo::McError) -> Self {
        match e {
            walsh_core::montecarlo::McError::Io(io) => CliError::Internal(io.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

fn uniform(m: usize) -> Vec<f64> {
    vec![1.0 / m as f64; m]
}

/// Exit-ray kernel of the star walk against the ruin mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HittingConfig {
    pub r: f64,
    pub a: f64,
    pub weights: Vec<f64>,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Optional binary dump of full trajectories for the first paths.
    pub dump_paths: Option<PathBuf>,
    pub dump_count: usize,
}

impl Default for HittingConfig {
    fn default() -> Self {
        HittingConfig {
            r: 0.3,
            a: 1.0,
            weights: uniform(4),
            dt: 1e-3,
            n_paths: 100_000,
            seed: 42,
            dump_paths: None,
            dump_count: 8,
        }
    }
}

/// Discounted exit functionals of the radial walk against closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaplaceConfig {
    pub r: f64,
    pub a: f64,
    pub lambda: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl Default for LaplaceConfig {
    fn default() -> Self {
        LaplaceConfig {
            r: 0.3,
            a: 1.0,
            lambda: 0.5,
            dt: 1e-3,
            n_paths: 1_000_000,
            seed: 43,
        }
    }
}

/// Sphere-pair coupling weight as the large-rate limit of the resolvent
/// pairing quadrature, scaled by the mean boundary profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FellerConfig {
    pub a: f64,
    pub lambdas: Vec<f64>,
    pub panels: usize,
    /// Per-ray boundary values of the two test profiles.
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub weights: Vec<f64>,
    /// Absolute gate on |quadrature - limit| for every rate >= `gate_from`.
    pub tolerance: f64,
    pub gate_from: f64,
}

impl Default for FellerConfig {
    fn default() -> Self {
        FellerConfig {
            a: 1.0,
            lambdas: vec![10.0, 100.0, 1000.0, 10000.0],
            panels: 4096,
            phi: vec![1.0, 0.5, 2.0, 1.5],
            psi: vec![2.0, 1.0, 0.5, 1.0],
            weights: uniform(4),
            tolerance: 1e-4,
            gate_from: 100.0,
        }
    }
}

/// Rebirth bookkeeping of the elastic walk plus the local-time accumulator
/// cross-check against the lattice-walk oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnowbRebirthConfig {
    pub kappa: f64,
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub weights: Vec<f64>,
    /// Lattice oracle: grid spacing, replication count and its own horizon.
    pub oracle_grid_h: f64,
    pub oracle_replications: usize,
    pub oracle_horizon: f64,
    /// Bridge-sampled accumulator run compared against the oracle.
    pub accumulator_dt: f64,
    pub accumulator_paths: usize,
}

impl Default for SnowbRebirthConfig {
    fn default() -> Self {
        SnowbRebirthConfig {
            kappa: 2.0,
            dt: 1e-3,
            horizon: 1.0,
            n_paths: 4_000,
            seed: 44,
            weights: uniform(4),
            oracle_grid_h: 1e-3,
            oracle_replications: 100_000,
            oracle_horizon: 0.04,
            accumulator_dt: 1e-4,
            accumulator_paths: 20_000,
        }
    }
}

/// First-passage law of the sphere-trace walk against the elastic walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceVsSnowbConfig {
    /// Radius of the watched sphere; the matched elastic rate is
    /// `1 / (2 * sphere_radius)`.
    pub sphere_radius: f64,
    pub start_offset: f64,
    pub target_offset: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub weights: Vec<f64>,
    pub ks_gate: f64,
}

impl Default for TraceVsSnowbConfig {
    fn default() -> Self {
        TraceVsSnowbConfig {
            sphere_radius: 0.5,
            start_offset: 0.2,
            target_offset: 1.0,
            dt: 2e-4,
            n_paths: 100_000,
            seed: 45,
            weights: uniform(3),
            ks_gate: 0.02,
        }
    }
}

/// Elastic walk collapsed at the origin against the star walk's laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DarningConfig {
    pub kappas: Vec<f64>,
    pub weights: Vec<f64>,
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub radial_ks_gate: f64,
    /// Optional binary dump of full trajectories at the first rate.
    pub dump_paths: Option<PathBuf>,
    pub dump_count: usize,
}

impl Default for DarningConfig {
    fn default() -> Self {
        DarningConfig {
            kappas: vec![0.5, 1.0, 4.0],
            weights: uniform(4),
            dt: 1e-3,
            horizon: 1.0,
            n_paths: 100_000,
            seed: 46,
            radial_ks_gate: 0.01,
            dump_paths: None,
            dump_count: 4,
        }
    }
}

/// Thin-collar lattice jump chain against the elastic membrane walk at the
/// matched resistance (rate = 1 / (2 * gamma_bar)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierVsSnowbConfig {
    pub epsilon: f64,
    pub gamma_bar: f64,
    pub grid_h: f64,
    pub start_ray: usize,
    pub start_r: f64,
    pub absorb_r: f64,
    pub weights: Vec<f64>,
    pub lattice_walks: usize,
    pub elastic_paths: usize,
    pub elastic_dt: f64,
    pub seed: u64,
    pub ks_gate: f64,
}

impl Default for BarrierVsSnowbConfig {
    fn default() -> Self {
        BarrierVsSnowbConfig {
            epsilon: 1e-3,
            gamma_bar: 0.5,
            grid_h: 1e-3,
            start_ray: 1,
            start_r: 0.1,
            absorb_r: 0.3,
            weights: vec![0.5, 0.25, 0.25],
            lattice_walks: 20_000,
            elastic_paths: 40_000,
            elastic_dt: 2e-4,
            seed: 47,
            ks_gate: 0.03,
        }
    }
}

/// Resolvent distances of collar forms to the three limit phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSweepConfig {
    /// Conductivity exponents: the collar conductivity is
    /// `(kappa * epsilon)^(-alpha)`.
    pub alphas: Vec<f64>,
    pub kappa: f64,
    pub epsilons: Vec<f64>,
    pub lambda: f64,
    pub n_rays: usize,
    pub nodes_per_ray: usize,
    pub spacing: f64,
    pub ratio_gate: f64,
}

impl Default for PhaseSweepConfig {
    fn default() -> Self {
        PhaseSweepConfig {
            alphas: vec![-1.0, -2.0, 0.0],
            kappa: 1.0,
            epsilons: vec![0.1, 0.05, 0.025, 0.0125],
            lambda: 1.0,
            n_rays: 4,
            nodes_per_ray: 2000,
            spacing: 5e-4,
            ratio_gate: 0.5,
        }
    }
}

/// Elastic resolvents continuous in the resistance parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaContinuityConfig {
    /// Sweep `gamma_n = 1 + 2^{-n}` for `n = 1..=steps` toward `gamma = 1`.
    pub steps: u32,
    pub lambda: f64,
    pub n_rays: usize,
    pub nodes_per_ray: usize,
    pub spacing: f64,
    /// Resistance whose coupling `1/(2 gamma)` must already sit on the
    /// decoupled (reflecting) resolvent at 1e-6 relative.
    pub reflecting_gamma: f64,
    pub ratio_gate: f64,
}

impl Default for GammaContinuityConfig {
    fn default() -> Self {
        GammaContinuityConfig {
            steps: 6,
            lambda: 1.0,
            n_rays: 4,
            nodes_per_ray: 401,
            spacing: 2.5e-3,
            reflecting_gamma: 5e5,
            ratio_gate: 0.7,
        }
    }
}

/// Collar interpolants carry the elastic energy at first order in the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryConfig {
    pub gamma_bar: f64,
    pub epsilon: f64,
    /// The per-ray test data is `(+/-1) * exp(-decay * r)`.
    pub decay: f64,
    pub outer_radius: f64,
    pub spacing: f64,
    pub n_rays: usize,
    pub rel_error_gate: f64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            gamma_bar: 0.5,
            epsilon: 0.01,
            decay: 3.0,
            outer_radius: 0.2,
            spacing: 1e-4,
            n_rays: 2,
            rel_error_gate: 1e-3,
        }
    }
}

/// Nullspace dimensions of the four assembled forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelsConfig {
    pub kappa: f64,
    pub n_rays: usize,
    pub nodes_per_ray: usize,
    pub spacing: f64,
    pub barrier_b: f64,
    pub barrier_epsilon: f64,
    /// Optional prefix for stiffness/mass text exports
    /// (`<prefix>.coo.csv`, `<prefix>.mass.csv`).
    pub matrix_out: Option<PathBuf>,
}

impl Default for KernelsConfig {
    fn default() -> Self {
        KernelsConfig {
            kappa: 1.0,
            n_rays: 4,
            nodes_per_ray: 1000,
            spacing: 1e-3,
            barrier_b: 0.1,
            barrier_epsilon: 0.05,
            matrix_out: None,
        }
    }
}

/// A tagged experiment selection with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", content = "params", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Hitting(HittingConfig),
    Laplace(LaplaceConfig),
    Feller(FellerConfig),
    SnowbRebirth(SnowbRebirthConfig),
    TraceVsSnowb(TraceVsSnowbConfig),
    Darning(DarningConfig),
    BarrierVsSnowb(BarrierVsSnowbConfig),
    PhaseSweep(PhaseSweepConfig),
    GammaContinuity(GammaContinuityConfig),
    Recovery(RecoveryConfig),
    Kernels(KernelsConfig),
}

impl ExperimentConfig {
    pub fn id(&self) -> &'static str {
        match self {
            ExperimentConfig::Hitting(_) => "hitting",
            ExperimentConfig::Laplace(_) => "laplace",
            ExperimentConfig::Feller(_) => "feller",
            ExperimentConfig::SnowbRebirth(_) => "snowb-rebirth",
            ExperimentConfig::TraceVsSnowb(_) => "trace-vs-snowb",
            ExperimentConfig::Darning(_) => "darning",
            ExperimentConfig::BarrierVsSnowb(_) => "barrier-vs-snowb",
            ExperimentConfig::PhaseSweep(_) => "phase-sweep",
            ExperimentConfig::GammaContinuity(_) => "gamma-continuity",
            ExperimentConfig::Recovery(_) => "recovery",
            ExperimentConfig::Kernels(_) => "kernels",
        }
    }

    /// Applies command-line overrides where they make sense; requesting a
    /// path-count override on a deterministic experiment is a config error.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        n_paths: Option<usize>,
    ) -> Result<(), CliError> {
        match self {
            ExperimentConfig::Hitting(c) => {
                if let Some(s) = seed {
                    c.seed = s;
                }
                if let Some(n) = n_paths {
                    c.n_paths = n;
                }
            }
            ExperimentConfig::Laplace(c) => {
                if let Some(s) = seed {
                    c.seed = s;
                }
                if let Some(n) = n_paths {
                    c.n_paths = n;
                }
            }
            ExperimentConfig::SnowbRebirth(c) => {
                if let Some(s) = seed {
                    c.seed = s;
                }
                if let Some(n) = n_paths {
                    c.n_paths = n;
                }
            }
            ExperimentConfig::TraceVsSnowb(c) => {
                if let Some(s) = seed {
                    c.seed = s;
                }
                if let Some(n) = n_paths {
                    c.n_paths = n;
                }
            }
            ExperimentConfig::Darning(c) => {
                if let Some(s) = seed {
                    c.seed = s;
                }
                if let Some(n) = n_paths {
                    c.n_paths = n;
                }
            }
            ExperimentConfig::BarrierVsSnowb(c) => {
                if let Some(s) = seed {
                    c.seed = s;
                }
                if let Some(n) = n_paths {
                    c.lattice_walks = n;
                    c.elastic_paths = n;
                }
            }
            ExperimentConfig::Feller(_)
            | ExperimentConfig::PhaseSweep(_)
            | ExperimentConfig::GammaContinuity(_)
            | ExperimentConfig::Recovery(_)
            | ExperimentConfig::Kernels(_) => {
                if seed.is_some() || n_paths.is_some() {
                    return Err(CliError::Config(format!(
                        "experiment `{}` is deterministic and takes no seed or path count",
                        self.id()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parses a configuration document, mapping JSON errors to config errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_every_variant() {
        let configs = vec![
            ExperimentConfig::Hitting(HittingConfig::default()),
            ExperimentConfig::Laplace(LaplaceConfig::default()),
            ExperimentConfig::Feller(FellerConfig::default()),
            ExperimentConfig::SnowbRebirth(SnowbRebirthConfig::default()),
            ExperimentConfig::TraceVsSnowb(TraceVsSnowbConfig::default()),
            ExperimentConfig::Darning(DarningConfig::default()),
            ExperimentConfig::BarrierVsSnowb(BarrierVsSnowbConfig::default()),
            ExperimentConfig::PhaseSweep(PhaseSweepConfig::default()),
            ExperimentConfig::GammaContinuity(GammaContinuityConfig::default()),
            ExperimentConfig::Recovery(RecoveryConfig::default()),
            ExperimentConfig::Kernels(KernelsConfig::default()),
        ];
        for config in configs {
            let text = serde_json::to_string(&config).unwrap();
            let back = parse_config(&text).unwrap();
            assert_eq!(back, config);
        }
    }

    #[test]
    fn empty_params_take_defaults() {
        let parsed = parse_config(r#"{"experiment": "hitting", "params": {}}"#).unwrap();
        assert_eq!(parsed, ExperimentConfig::Hitting(HittingConfig::default()));
    }

    #[test]
    fn unknown_fields_and_ids_are_config_errors() {
        assert!(parse_config(r#"{"experiment": "warp-drive", "params": {}}"#).is_err());
        assert!(
            parse_config(r#"{"experiment": "hitting", "params": {"paths": 10}}"#).is_err(),
            "misspelled field must not be silently dropped"
        );
    }

    #[test]
    fn overrides_apply_to_stochastic_experiments_only() {
        let mut c = ExperimentConfig::Hitting(HittingConfig::default());
        c.apply_overrides(Some(7), Some(123)).unwrap();
        match &c {
            ExperimentConfig::Hitting(h) => {
                assert_eq!(h.seed, 7);
                assert_eq!(h.n_paths, 123);
            }
            _ => unreachable!(),
        }
        let mut k = ExperimentConfig::Kernels(KernelsConfig::default());
        assert!(k.apply_overrides(Some(7), None).is_err());
        assert!(k.apply_overrides(None, None).is_ok());
    }
}
