//! Exact-in-law Monte Carlo samplers for the star diffusions.
//!
//! All samplers share three conventions:
//!
//! - **Exact marginals.** Radial moves use the closed-form transition of
//!   reflected Brownian motion; origin contact, level crossings and boundary
//!   local time within a step are drawn from their exact conditional laws
//!   given the step endpoints (see [`steps`]). Step size therefore only
//!   limits event-timing resolution, not marginal accuracy.
//! - **Counter-based streams.** Path `i` of an experiment seeded with `s`
//!   always uses [`path_stream`]`(s, i)`, so results are bit-identical under
//!   any parallel schedule.
//! - **Occupation-normalized local time.** Boundary local time is the
//!   occupation density at the origin with respect to the radial Lebesgue
//!   measure: started at the origin its mean at time `t` is
//!   `2 sqrt(2 t / pi)`. The elastic walk kills when this additive functional
//!   crosses an `Exp(kappa)` threshold, matching the origin coupling
//!   `(kappa/2)` of the elastic quadratic form.

pub mod barrier;
pub mod dump;
pub mod estimate;
pub mod oracle;
pub mod snowb;
pub mod stats;
pub mod steps;
pub mod trace;
pub mod walsh;

use crate::domain::StarPoint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use barrier::{barrier_crossing_frequency, barrier_exit_chain, BarrierWalker};
pub use dump::{read_path_dump, write_path_dump};
pub use estimate::{estimate_hitting, exit_laplace_estimate, EmpiricalKernel, ExitLaplaceEstimate};
pub use oracle::reflected_rw_mean_local_time;
pub use snowb::{
    radial_first_passage_times, snowb_darned_marginal, snowb_exit_chain, snowb_mean_local_time,
    snowb_path, SnowbStepper,
};
pub use stats::{chi_square, ks_statistic, ks_two_sample, normal_cdf, ChiSquareOutcome};
pub use steps::{
    bm_two_sided_exit, bridge_crossing_probability, occupation_above, reflected_step,
    reflected_step_with_local_time, ExitSide,
};
pub use trace::{trace_first_passage_times, trace_wbm_path};
pub use walsh::{wbm_exit_chain, wbm_marginal_at, wbm_path, wbm_step};

/// Errors from simulation configuration, estimation and dump I/O.
#[derive(Debug, Error)]
pub enum McError {
    #[error("step size must be positive and finite, got {0}")]
    BadDt(f64),
    #[error("horizon must be at least one step, got horizon {horizon} with dt {dt}")]
    BadHorizon { horizon: f64, dt: f64 },
    #[error("path count must be positive")]
    NoPaths,
    #[error("killing rate must be positive and finite, got {0}")]
    BadKappa(f64),
    #[error("discount rate must be nonnegative and finite, got {0}")]
    BadRate(f64),
    #[error("configuration needs a killing rate for the elastic walk")]
    MissingKappa,
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("start radius {start} must lie inside the absorbing radius {absorb}")]
    StartOutsideAbsorber { start: f64, absorb: f64 },
    #[error("radius {0} does not fall on the walk lattice")]
    OffLattice(f64),
    #[error("barrier breakpoints do not align with the lattice spacing {0}")]
    LatticeMisaligned(f64),
    #[error("ray {ray} out of range for a measure with {n_rays} rays")]
    RayOutOfRange { ray: usize, n_rays: usize },
    #[error("estimator needs a nonempty sample")]
    EmptySample,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("expected counts must all be positive and finite")]
    BadExpected,
    #[error("path dump is malformed: {0}")]
    BadDump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Shared simulation parameters. Samplers that need the killing rate or an
/// absorbing radius read the optional fields and reject configurations that
/// omit them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub outer_radius: Option<f64>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), McError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(McError::BadDt(self.dt));
        }
        if !(self.horizon >= self.dt) || !self.horizon.is_finite() {
            return Err(McError::BadHorizon {
                horizon: self.horizon,
                dt: self.dt,
            });
        }
        if self.n_paths == 0 {
            return Err(McError::NoPaths);
        }
        if let Some(kappa) = self.kappa {
            if !(kappa > 0.0) || !kappa.is_finite() {
                return Err(McError::BadKappa(kappa));
            }
        }
        if let Some(r) = self.outer_radius {
            if !(r > 0.0) || !r.is_finite() {
                return Err(McError::BadRadius(r));
            }
        }
        Ok(())
    }

    pub fn kappa(&self) -> Result<f64, McError> {
        self.kappa.ok_or(McError::MissingKappa)
    }

    /// Number of whole steps covering the horizon.
    pub fn n_steps(&self) -> u64 {
        (self.horizon / self.dt).round().max(1.0) as u64
    }
}

/// Full per-walker state used by the elastic (killed and reborn) walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkerState {
    pub point: StarPoint,
    pub clock: f64,
    /// Occupation local time accumulated at the origin since the last rebirth.
    pub local_time: f64,
    /// Current exponential killing threshold in local-time units.
    pub kill_threshold: f64,
}

/// How a first-passage record left the observation region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitKind {
    /// Reached the exit radius without ever touching the origin: the ray is
    /// still the starting one.
    SameRay,
    /// Touched the origin (and possibly switched rays) before exiting.
    Rebirth,
    /// Absorbed at the configured outer truncation radius.
    OuterBoundary,
}

impl std::fmt::Display for ExitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExitKind::SameRay => "same_ray",
            ExitKind::Rebirth => "rebirth",
            ExitKind::OuterBoundary => "outer_boundary",
        })
    }
}

/// One first-passage record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub exit: StarPoint,
    pub kind: ExitKind,
    pub elapsed: f64,
}

/// A collection of first-passage records (one per simulated path).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct JumpChainSample {
    pub records: Vec<JumpRecord>,
}

/// One rebirth event of the elastic walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RebirthRecord {
    /// Ray the walk was reborn onto (drawn from the angular measure).
    pub ray: usize,
    /// Local time accumulated since the previous rebirth, i.e. the
    /// exponential threshold that was consumed.
    pub local_time_at_death: f64,
    /// Process clock at the step whose local-time increment crossed the
    /// threshold (end-of-step stamp, so exact up to one step).
    pub time: f64,
}

/// A discretized trajectory: `(time, point)` at every recorded step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathSample {
    pub steps: Vec<(f64, StarPoint)>,
}

/// The deterministic random stream of path `path_index` under `seed`.
///
/// Streams with different indices are statistically independent, and the
/// mapping is pure, so parallel path execution in any order reproduces the
/// sequential results bit for bit.
pub fn path_stream(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn config_validation_catches_each_field() {
        let good = SimConfig {
            dt: 1e-3,
            horizon: 1.0,
            n_paths: 10,
            seed: 1,
            kappa: Some(2.0),
            outer_radius: Some(1.0),
        };
        assert!(good.validate().is_ok());
        assert_eq!(good.n_steps(), 1000);
        assert!(SimConfig { dt: 0.0, ..good }.validate().is_err());
        assert!(SimConfig { horizon: 1e-4, ..good }.validate().is_err());
        assert!(SimConfig { n_paths: 0, ..good }.validate().is_err());
        assert!(SimConfig { kappa: Some(0.0), ..good }.validate().is_err());
        assert!(SimConfig { outer_radius: Some(-1.0), ..good }.validate().is_err());
        assert!(SimConfig { kappa: None, ..good }.validate().is_ok());
        assert!(matches!(
            SimConfig { kappa: None, ..good }.kappa(),
            Err(McError::MissingKappa)
        ));
    }

    #[test]
    fn path_streams_are_reproducible_and_distinct() {
        let mut a = path_stream(42, 7);
        let mut b = path_stream(42, 7);
        let mut c = path_stream(42, 8);
        let mut d = path_stream(43, 7);
        let xs: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, (0..4).map(|_| c.next_u64()).collect::<Vec<_>>());
        assert_ne!(xs, (0..4).map(|_| d.next_u64()).collect::<Vec<_>>());
    }
}
