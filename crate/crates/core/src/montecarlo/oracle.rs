//! Independent cross-check for the local-time accumulator: a plain reflected
//! lattice walk whose origin visits are counted directly.
//!
//! Nothing here shares logic with the Gaussian step kernels. The walk takes
//! `+h`/`-h` moves every `h^2` time units (forced outward at the origin) and
//! the occupation local time is `2h` per origin visit: a visit occupies
//! `h^2` of time spread over the origin's half-cell of width `h/2`. Move
//! decisions come from a 64-step bit pool, so a replication costs one `u64`
//! draw per 64 moves.

use super::{path_stream, McError};
use rand::RngCore;
use rayon::prelude::*;

/// Mean occupation local time at the origin accumulated by `horizon`,
/// estimated from `replications` reflected lattice walks at spacing `grid_h`
/// started from `start_r` (which must sit on the lattice).
pub fn reflected_rw_mean_local_time(
    start_r: f64,
    horizon: f64,
    grid_h: f64,
    replications: usize,
    seed: u64,
) -> Result<f64, McError> {
    if !(grid_h > 0.0) || !grid_h.is_finite() {
        return Err(McError::BadDt(grid_h));
    }
    if replications == 0 {
        return Err(McError::NoPaths);
    }
    if !(start_r >= 0.0) || !start_r.is_finite() {
        return Err(McError::BadRadius(start_r));
    }
    let start_node = (start_r / grid_h).round();
    if (start_r - start_node * grid_h).abs() > 1e-9 * start_r.abs().max(1.0) {
        return Err(McError::OffLattice(start_r));
    }
    let tick = grid_h * grid_h;
    let steps = (horizon / tick).round() as u64;
    if !(horizon > 0.0) || !horizon.is_finite() || steps == 0 {
        return Err(McError::BadHorizon { horizon, dt: tick });
    }
    let start_node = start_node as u32;

    let total_visits: u64 = (0..replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = path_stream(seed, rep);
            let mut pos = start_node;
            let mut visits = 0u64;
            let mut pool = 0u64;
            let mut pool_left = 0u32;
            for _ in 0..steps {
                if pos == 0 {
                    visits += 1;
                    pos = 1;
                } else {
                    if pool_left == 0 {
                        pool = rng.next_u64();
                        pool_left = 64;
                    }
                    pos = (pos as i64 + ((pool & 1) as i64 * 2 - 1)) as u32;
                    pool >>= 1;
                    pool_left -= 1;
                }
            }
            visits
        })
        .sum();
    Ok(2.0 * grid_h * total_visits as f64 / replications as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::snowb::snowb_mean_local_time;
    use crate::montecarlo::SimConfig;

    #[test]
    fn lattice_visits_recover_the_reflection_mean() {
        // E[occupation local time at t] from the origin is 2*sqrt(2t/pi)
        let mean = reflected_rw_mean_local_time(0.0, 0.01, 2e-3, 20_000, 8).unwrap();
        let expected = 2.0 * (2.0f64 * 0.01 / std::f64::consts::PI).sqrt();
        assert!(
            (mean - expected).abs() / expected < 0.03,
            "lattice mean {mean} vs {expected}"
        );
    }

    #[test]
    fn lattice_and_gaussian_accumulators_agree() {
        let lattice = reflected_rw_mean_local_time(0.0, 0.01, 2e-3, 20_000, 8).unwrap();
        let config = SimConfig {
            dt: 1e-4,
            horizon: 0.01,
            n_paths: 20_000,
            seed: 9,
            kappa: None,
            outer_radius: None,
        };
        let gaussian = snowb_mean_local_time(0.0, &config).unwrap();
        assert!(
            (lattice - gaussian).abs() / gaussian < 0.03,
            "lattice {lattice} vs gaussian {gaussian}"
        );
    }

    #[test]
    fn oracle_inputs_are_validated() {
        assert!(matches!(
            reflected_rw_mean_local_time(0.0, 0.01, -1.0, 10, 0),
            Err(McError::BadDt(_))
        ));
        assert!(matches!(
            reflected_rw_mean_local_time(0.0, 0.01, 1e-3, 0, 0),
            Err(McError::NoPaths)
        ));
        assert!(matches!(
            reflected_rw_mean_local_time(0.0015, 0.01, 1e-3, 10, 0),
            Err(McError::OffLattice(_))
        ));
        assert!(matches!(
            reflected_rw_mean_local_time(0.0, 0.0, 1e-3, 10, 0),
            Err(McError::BadHorizon { .. })
        ));
    }
}
