//! Lattice walk for the membrane star: a birth–death chain on the radial
//! grid whose per-cell conductances follow the barrier profile, with ray
//! resampling at the origin node.
//!
//! The chain is the Markov chain of the discrete energy form with cell
//! conductances `b(cell)/(2h)` and trapezoidal node masses: jump odds at a
//! node are proportional to the adjacent cell conductivities, and each visit
//! contributes its expected holding time `2h^2 / (b_left + b_right)`
//! deterministically to the clock (`h^2 / b_first` at the origin, which
//! always moves to the first node). In a uniform medium this is exactly the
//! step-`h` reflecting walk observed every `h^2` time units. Jump decisions
//! compare a raw 64-bit draw against a precomputed threshold, so a walk costs
//! one `u64` per step away from the origin.

use super::{path_stream, ExitKind, JumpChainSample, JumpRecord, McError, SimConfig};
use crate::domain::{AngularMeasure, BarrierProfile, StarPoint};
use rand::{Rng, RngCore};
use rayon::prelude::*;

const LATTICE_TOLERANCE: f64 = 1e-9;

fn lattice_node(r: f64, grid_h: f64) -> Result<usize, McError> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(McError::BadRadius(r));
    }
    let n = (r / grid_h).round();
    if (r - n * grid_h).abs() > LATTICE_TOLERANCE * r.abs().max(1.0) {
        return Err(McError::OffLattice(r));
    }
    Ok(n as usize)
}

fn threshold_from_prob(p: f64) -> u64 {
    // 2^64; the cast saturates, so p = 1 maps to a draw that is almost
    // surely below threshold
    let scale = u64::MAX as f64 + 1.0;
    ((p * scale) as u128).min(u64::MAX as u128) as u64
}

/// Precomputed jump table for the membrane lattice walk at spacing `grid_h`.
///
/// Nodes inside and on the edge of the collar carry tabulated thresholds and
/// holding times; beyond the table the medium is uniform and the walk is
/// symmetric with holding time `h^2`.
#[derive(Debug, Clone)]
pub struct BarrierWalker {
    grid_h: f64,
    /// Right-move cutoffs for nodes `1..=table_len()`.
    thresholds: Vec<u64>,
    /// Holding times for nodes `1..=table_len()`.
    durations: Vec<f64>,
    origin_duration: f64,
    uniform_duration: f64,
}

impl BarrierWalker {
    pub fn new(profile: &BarrierProfile, grid_h: f64) -> Result<Self, McError> {
        if !(grid_h > 0.0) || !grid_h.is_finite() {
            return Err(McError::BadDt(grid_h));
        }
        for &t in profile.breakpoints() {
            let n = (t / grid_h).round();
            if (t - n * grid_h).abs() > LATTICE_TOLERANCE * t.abs().max(1.0) {
                return Err(McError::LatticeMisaligned(grid_h));
            }
        }
        // the last node with a collar cell on its left; everything beyond
        // sees the uniform medium on both sides
        let n_collar = (profile.epsilon() / grid_h).round() as usize;
        let mut thresholds = Vec::with_capacity(n_collar);
        let mut durations = Vec::with_capacity(n_collar);
        for node in 1..=n_collar {
            let b_left = profile.conductivity((node as f64 - 0.5) * grid_h);
            let b_right = profile.conductivity((node as f64 + 0.5) * grid_h);
            thresholds.push(threshold_from_prob(b_right / (b_left + b_right)));
            durations.push(2.0 * grid_h * grid_h / (b_left + b_right));
        }
        Ok(Self {
            grid_h,
            thresholds,
            durations,
            origin_duration: grid_h * grid_h / profile.conductivity(0.5 * grid_h),
            uniform_duration: grid_h * grid_h,
        })
    }

    pub fn grid_h(&self) -> f64 {
        self.grid_h
    }

    /// Last tabulated node; nodes beyond it behave uniformly.
    pub fn table_len(&self) -> usize {
        self.thresholds.len()
    }

    /// Expected holding time of a node.
    pub fn node_duration(&self, node: usize) -> f64 {
        if node == 0 {
            self.origin_duration
        } else if node <= self.thresholds.len() {
            self.durations[node - 1]
        } else {
            self.uniform_duration
        }
    }

    /// Probability that a node moves outward.
    pub fn right_probability(&self, node: usize) -> f64 {
        if node == 0 {
            1.0
        } else if node <= self.thresholds.len() {
            self.thresholds[node - 1] as f64 / (u64::MAX as f64 + 1.0)
        } else {
            0.5
        }
    }

    /// Advances the walk by one jump, accumulating the holding time of the
    /// departed node. At the origin the ray is redrawn from the measure.
    #[inline]
    pub fn step<R: Rng + ?Sized>(
        &self,
        node: &mut usize,
        ray: &mut usize,
        clock: &mut f64,
        measure: &AngularMeasure,
        rng: &mut R,
    ) {
        if *node == 0 {
            *ray = measure.sample_ray(rng);
            *clock += self.origin_duration;
            *node = 1;
        } else if *node <= self.thresholds.len() {
            let k = *node - 1;
            *clock += self.durations[k];
            if rng.next_u64() < self.thresholds[k] {
                *node += 1;
            } else {
                *node -= 1;
            }
        } else {
            *clock += self.uniform_duration;
            if rng.next_u64() < 1u64 << 63 {
                *node += 1;
            } else {
                *node -= 1;
            }
        }
    }

    /// Runs the walk until it reaches `absorb_node`, reporting the exit ray,
    /// whether the origin was ever visited and the accumulated clock.
    pub fn walk_to_exit<R: Rng + ?Sized>(
        &self,
        start_ray: usize,
        start_node: usize,
        absorb_node: usize,
        measure: &AngularMeasure,
        rng: &mut R,
    ) -> JumpRecord {
        let mut node = start_node;
        let mut ray = start_ray;
        let mut clock = 0.0;
        let mut touched = false;
        while node != absorb_node {
            touched |= node == 0;
            self.step(&mut node, &mut ray, &mut clock, measure, rng);
        }
        JumpRecord {
            exit: StarPoint {
                ray,
                r: absorb_node as f64 * self.grid_h,
            },
            kind: if touched {
                ExitKind::Rebirth
            } else {
                ExitKind::SameRay
            },
            elapsed: clock,
        }
    }
}

/// First-passage records of the membrane lattice walk from `start` to the
/// lattice sphere at `absorb_radius`; both radii must sit on the lattice.
pub fn barrier_exit_chain(
    profile: &BarrierProfile,
    grid_h: f64,
    start: StarPoint,
    absorb_radius: f64,
    measure: &AngularMeasure,
    config: &SimConfig,
) -> Result<JumpChainSample, McError> {
    config.validate()?;
    if start.ray >= measure.n_rays() {
        return Err(McError::RayOutOfRange {
            ray: start.ray,
            n_rays: measure.n_rays(),
        });
    }
    let walker = BarrierWalker::new(profile, grid_h)?;
    let start_node = lattice_node(start.r, grid_h)?;
    let absorb_node = lattice_node(absorb_radius, grid_h)?;
    if start_node >= absorb_node {
        return Err(McError::StartOutsideAbsorber {
            start: start.r,
            absorb: absorb_radius,
        });
    }
    let records: Vec<JumpRecord> = (0..config.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_stream(config.seed, i);
            let mut record =
                walker.walk_to_exit(start.ray, start_node, absorb_node, measure, &mut rng);
            record.exit.r = absorb_radius;
            record
        })
        .collect();
    Ok(JumpChainSample { records })
}

/// Fraction of walks from `start_r` that reach the origin node within the
/// horizon. The walk stops at the first origin contact, so the ray plays no
/// role in this radial statistic.
pub fn barrier_crossing_frequency(
    profile: &BarrierProfile,
    grid_h: f64,
    start_r: f64,
    config: &SimConfig,
) -> Result<f64, McError> {
    config.validate()?;
    let walker = BarrierWalker::new(profile, grid_h)?;
    let start_node = lattice_node(start_r, grid_h)?;
    let horizon = config.horizon;
    let crossings: u64 = (0..config.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_stream(config.seed, i);
            let mut node = start_node;
            let mut clock = 0.0;
            loop {
                // the clock is the arrival time at the current node
                if clock >= horizon {
                    return 0u64;
                }
                if node == 0 {
                    return 1u64;
                }
                // the ray is irrelevant before the first origin visit
                let k = node - 1;
                if node <= walker.thresholds.len() {
                    clock += walker.durations[k];
                    if rng.next_u64() < walker.thresholds[k] {
                        node += 1;
                    } else {
                        node -= 1;
                    }
                } else {
                    clock += walker.uniform_duration;
                    if rng.next_u64() < 1u64 << 63 {
                        node += 1;
                    } else {
                        node -= 1;
                    }
                }
            }
        })
        .sum();
    Ok(crossings as f64 / config.n_paths as f64)
}
