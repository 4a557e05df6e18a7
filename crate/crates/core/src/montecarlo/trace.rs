//! Observation of the glued-origin walk through the clock that only runs
//! while the radius exceeds an inner sphere.
//!
//! The trace clock advances by the conditional occupation of `{r >= inner}`
//! inside each step, computed from the exact bridge marginals, so excursions
//! below the sphere are excised in expectation rather than at step
//! resolution. Reflection at the origin is ignored inside the occupation
//! integral: a step would need both an origin contact and mass above the
//! inner sphere for that to matter, which carries probability
//! `exp(-O(inner^2 / dt))`.

use super::steps::{bridge_crossing_probability, occupation_above};
use super::walsh::wbm_step;
use super::{path_stream, McError, PathSample, SimConfig};
use crate::domain::{AngularMeasure, StarPoint};
use rand::Rng;
use rayon::prelude::*;

fn check_inner(inner_radius: f64) -> Result<(), McError> {
    if !(inner_radius > 0.0) || !inner_radius.is_finite() {
        return Err(McError::BadRadius(inner_radius));
    }
    Ok(())
}

/// One trajectory of the time-changed walk: the base walk runs to the
/// horizon, and every step end with `r >= inner_radius` is recorded at its
/// trace time with the radius shifted by the sphere. Step ends below the
/// sphere are excised. Recording times are therefore irregular in the trace
/// clock.
pub fn trace_wbm_path(
    start: StarPoint,
    inner_radius: f64,
    measure: &AngularMeasure,
    config: &SimConfig,
    path_index: u64,
) -> Result<PathSample, McError> {
    config.validate()?;
    check_inner(inner_radius)?;
    if start.ray >= measure.n_rays() {
        return Err(McError::RayOutOfRange {
            ray: start.ray,
            n_rays: measure.n_rays(),
        });
    }
    let mut rng = path_stream(config.seed, path_index);
    let mut point = start;
    let mut trace_clock = 0.0;
    let mut steps = Vec::new();
    if point.r >= inner_radius {
        steps.push((
            0.0,
            StarPoint {
                ray: point.ray,
                r: point.r - inner_radius,
            },
        ));
    }
    for _ in 0..config.n_steps() {
        let r_before = point.r;
        wbm_step(&mut point, measure, config.dt, &mut rng);
        trace_clock += occupation_above(inner_radius, r_before, point.r, config.dt);
        if point.r >= inner_radius {
            steps.push((
                trace_clock,
                StarPoint {
                    ray: point.ray,
                    r: point.r - inner_radius,
                },
            ));
        }
    }
    Ok(PathSample { steps })
}

/// Trace-clock first passage of the time-changed walk from `start_r` to
/// `target_radius` (both in base coordinates), one value per path. Crossings
/// of the target between step ends fire from the exact bridge law; the final
/// step's occupation is included in full, matching the step-resolution
/// convention of the plain first-passage samplers.
pub fn trace_first_passage_times(
    start_r: f64,
    inner_radius: f64,
    target_radius: f64,
    measure: &AngularMeasure,
    config: &SimConfig,
) -> Result<Vec<f64>, McError> {
    config.validate()?;
    check_inner(inner_radius)?;
    if !(start_r >= 0.0) || !start_r.is_finite() {
        return Err(McError::BadRadius(start_r));
    }
    if !(target_radius > inner_radius) || !target_radius.is_finite() {
        return Err(McError::BadRadius(target_radius));
    }
    if start_r >= target_radius {
        return Err(McError::StartOutsideAbsorber {
            start: start_r,
            absorb: target_radius,
        });
    }
    let dt = config.dt;
    Ok((0..config.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_stream(config.seed, i);
            let mut point = StarPoint { ray: 0, r: start_r };
            let mut trace_clock = 0.0;
            loop {
                let r_before = point.r;
                let hit = wbm_step(&mut point, measure, dt, &mut rng);
                trace_clock += occupation_above(inner_radius, r_before, point.r, dt);
                if point.r >= target_radius {
                    break;
                }
                if !hit {
                    let p = bridge_crossing_probability(r_before, point.r, target_radius, dt);
                    if p > 0.0 && rng.random::<f64>() < p {
                        break;
                    }
                }
            }
            trace_clock
        })
        .collect())
}
