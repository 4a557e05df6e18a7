//! Estimators layered on the path samplers: empirical hitting kernels from
//! first-passage records and Laplace-transform exit functionals for the
//! linear segment.

use super::steps::{bm_two_sided_exit, ExitSide};
use super::{path_stream, ExitKind, JumpChainSample, McError, SimConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Empirical decomposition of a first-passage sample into the same-ray atom
/// and the per-ray exit masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalKernel {
    /// Fraction of records that exited without touching the origin.
    pub atom_mass: f64,
    /// Binomial standard error of the atom, when at least two records exist.
    pub atom_se: Option<f64>,
    /// Exit-ray distribution over all records (atom included).
    pub ray_masses: Vec<f64>,
    /// Raw exit-ray counts behind `ray_masses`.
    pub ray_counts: Vec<u64>,
    pub n_records: usize,
}

/// Reduces a first-passage sample to an [`EmpiricalKernel`] over `n_rays`
/// rays.
pub fn estimate_hitting(
    sample: &JumpChainSample,
    n_rays: usize,
) -> Result<EmpiricalKernel, McError> {
    let n = sample.records.len();
    if n == 0 {
        return Err(McError::EmptySample);
    }
    let mut ray_counts = vec![0u64; n_rays];
    let mut atom = 0u64;
    for record in &sample.records {
        if record.exit.ray >= n_rays {
            return Err(McError::RayOutOfRange {
                ray: record.exit.ray,
                n_rays,
            });
        }
        ray_counts[record.exit.ray] += 1;
        if record.kind == ExitKind::SameRay {
            atom += 1;
        }
    }
    let atom_mass = atom as f64 / n as f64;
    let atom_se = if n >= 2 {
        Some((atom_mass * (1.0 - atom_mass) / n as f64).sqrt())
    } else {
        None
    };
    Ok(EmpiricalKernel {
        atom_mass,
        atom_se,
        ray_masses: ray_counts.iter().map(|&c| c as f64 / n as f64).collect(),
        ray_counts,
        n_records: n,
    })
}

/// Monte Carlo estimates of the three discounted exit functionals of a
/// linear segment, with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitLaplaceEstimate {
    /// Discounted mass of exits at the far end, from the interior start.
    pub up: f64,
    pub up_se: f64,
    /// Discounted mass of exits at the near end, from the interior start.
    pub down: f64,
    pub down_se: f64,
    /// Discounted exit mass of the symmetric interval from its midpoint.
    pub through: f64,
    pub through_se: f64,
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Estimates the discounted exit functionals at rate `lambda` for a free
/// linear motion on `(0, a)` started at `r`, plus the symmetric two-sided
/// functional on `(-a, a)` started at the midpoint. Uses `config.n_paths`
/// paths for each of the two runs, on disjoint deterministic streams.
pub fn exit_laplace_estimate(
    r: f64,
    a: f64,
    lambda: f64,
    config: &SimConfig,
) -> Result<ExitLaplaceEstimate, McError> {
    config.validate()?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(McError::BadRadius(a));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(McError::BadRadius(r));
    }
    if r >= a {
        return Err(McError::StartOutsideAbsorber { start: r, absorb: a });
    }
    if config.n_paths < 2 {
        return Err(McError::EmptySample);
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(McError::BadRate(lambda));
    }
    let dt = config.dt;
    let n = config.n_paths as u64;

    let one_sided: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_stream(config.seed, i);
            let (side, elapsed) = bm_two_sided_exit(r, 0.0, a, dt, &mut rng);
            let discount = (-lambda * elapsed).exp();
            match side {
                ExitSide::Upper => (discount, 0.0),
                ExitSide::Lower => (0.0, discount),
            }
        })
        .collect();
    let ups: Vec<f64> = one_sided.iter().map(|p| p.0).collect();
    let downs: Vec<f64> = one_sided.iter().map(|p| p.1).collect();

    let throughs: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_stream(config.seed, n + i);
            let (_, elapsed) = bm_two_sided_exit(0.0, -a, a, dt, &mut rng);
            (-lambda * elapsed).exp()
        })
        .collect();

    let (up, up_se) = mean_and_se(&ups);
    let (down, down_se) = mean_and_se(&downs);
    let (through, through_se) = mean_and_se(&throughs);
    Ok(ExitLaplaceEstimate {
        up,
        up_se,
        down,
        down_se,
        through,
        through_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::bm_exit_laplace;
    use crate::domain::StarPoint;
    use crate::montecarlo::JumpRecord;

    fn record(ray: usize, kind: ExitKind) -> JumpRecord {
        JumpRecord {
            exit: StarPoint { ray, r: 1.0 },
            kind,
            elapsed: 0.5,
        }
    }

    #[test]
    fn kernel_summary_counts_atoms_and_rays() {
        let sample = JumpChainSample {
            records: vec![
                record(1, ExitKind::SameRay),
                record(1, ExitKind::SameRay),
                record(1, ExitKind::SameRay),
                record(0, ExitKind::Rebirth),
                record(0, ExitKind::Rebirth),
                record(2, ExitKind::Rebirth),
                record(2, ExitKind::Rebirth),
                record(2, ExitKind::Rebirth),
                record(2, ExitKind::Rebirth),
                record(2, ExitKind::Rebirth),
            ],
        };
        let kernel = estimate_hitting(&sample, 3).unwrap();
        assert_eq!(kernel.n_records, 10);
        assert_eq!(kernel.atom_mass, 0.3);
        assert_eq!(kernel.ray_counts, vec![2, 3, 5]);
        assert_eq!(kernel.ray_masses, vec![0.2, 0.3, 0.5]);
        let se = kernel.atom_se.unwrap();
        assert!((se - (0.3f64 * 0.7 / 10.0).sqrt()).abs() < 1e-15);

        assert!(matches!(
            estimate_hitting(&JumpChainSample { records: vec![] }, 3),
            Err(McError::EmptySample)
        ));
        assert!(matches!(
            estimate_hitting(&sample, 2),
            Err(McError::RayOutOfRange { .. })
        ));
    }

    #[test]
    fn discounted_exits_match_the_closed_form() {
        let config = SimConfig {
            dt: 1e-3,
            horizon: 1.0,
            n_paths: 30_000,
            seed: 4242,
            kappa: None,
            outer_radius: None,
        };
        let (r, a, lambda) = (0.3, 1.0, 0.5);
        let estimate = exit_laplace_estimate(r, a, lambda, &config).unwrap();
        let (up, down, through) = bm_exit_laplace(r, a, lambda).unwrap();
        assert!(
            (estimate.up - up).abs() < 4.0 * estimate.up_se,
            "up {} vs {up} (se {})",
            estimate.up,
            estimate.up_se
        );
        assert!(
            (estimate.down - down).abs() < 4.0 * estimate.down_se,
            "down {} vs {down} (se {})",
            estimate.down,
            estimate.down_se
        );
        assert!(
            (estimate.through - through).abs() < 4.0 * estimate.through_se,
            "through {} vs {through} (se {})",
            estimate.through,
            estimate.through_se
        );
        for se in [estimate.up_se, estimate.down_se, estimate.through_se] {
            assert!(se > 0.0 && se < 0.01);
        }

        let again = exit_laplace_estimate(r, a, lambda, &config).unwrap();
        assert_eq!(estimate, again);
    }

    #[test]
    fn estimator_inputs_are_validated() {
        let config = SimConfig {
            dt: 1e-3,
            horizon: 1.0,
            n_paths: 100,
            seed: 1,
            kappa: None,
            outer_radius: None,
        };
        assert!(matches!(
            exit_laplace_estimate(1.2, 1.0, 0.5, &config),
            Err(McError::StartOutsideAbsorber { .. })
        ));
        assert!(matches!(
            exit_laplace_estimate(-0.1, 1.0, 0.5, &config),
            Err(McError::BadRadius(_))
        ));
        assert!(matches!(
            exit_laplace_estimate(0.3, 1.0, f64::NAN, &config),
            Err(McError::BadRate(_))
        ));
    }
}
