//! Star-graph geometry and measure primitives.
//!
//! A star with `m` rays is parametrised by a ray index and a radial coordinate
//! `r >= 0`. The angular measure `eta` assigns strictly positive mass to every
//! ray; it drives both the ray resampling of Walsh-type motions at the origin
//! and the weighting of all Dirichlet-form energies. Barrier profiles describe
//! a piecewise-constant conductivity `b` on a collar `[0, epsilon)`; their
//! resistance `integral of dr / b(r)` is the scalar that decides which limit
//! process a shrinking barrier produces.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Validation errors for geometry and measure inputs.
#[derive(Debug, Error)]
pub enum DomainError {
    #[error("angular measure needs at least two rays, got {0}")]
    TooFewRays(usize),
    #[error("ray weights must be strictly positive and finite, weight[{index}] = {value}")]
    BadWeight { index: usize, value: f64 },
    #[error("ray weights must sum to 1 within 1e-12, got {0}")]
    UnnormalizedWeights(f64),
    #[error("angles must be strictly increasing in [0, 2*pi), offending angle[{index}] = {value}")]
    BadAngle { index: usize, value: f64 },
    #[error("angles/weights length mismatch: {angles} angles vs {weights} weights")]
    LengthMismatch { angles: usize, weights: usize },
    #[error("breakpoints must satisfy 0 = t0 < t1 < ... < tk = epsilon, got {0:?}")]
    BadBreakpoints(Vec<f64>),
    #[error("conductivity values must be strictly positive and finite, value[{index}] = {value}")]
    BadValue { index: usize, value: f64 },
    #[error("{breakpoints} breakpoints define {expected} pieces, got {values} values")]
    PieceMismatch {
        breakpoints: usize,
        expected: usize,
        values: usize,
    },
    #[error("radius must be nonnegative and finite, got {0}")]
    BadRadius(f64),
    #[error("shift must satisfy 0 <= beta (and beta <= r when inverting), got beta = {beta}, r = {radius}")]
    BadShift { beta: f64, radius: f64 },
    #[error("ray index {ray} out of range for {n_rays} rays")]
    RayOutOfRange { ray: usize, n_rays: usize },
}

/// Finitely supported probability measure on ray directions.
///
/// `weights[j]` is the mass of ray `j`; every ray carries strictly positive
/// mass so the measure fully supports the configured star.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularMeasure {
    angles: Vec<f64>,
    weights: Vec<f64>,
}

impl AngularMeasure {
    /// Builds a measure from explicit angles (strictly increasing in `[0, 2*pi)`)
    /// and matching weights summing to 1 within `1e-12`.
    pub fn new(angles: Vec<f64>, weights: Vec<f64>) -> Result<Self, DomainError> {
        if angles.len() != weights.len() {
            return Err(DomainError::LengthMismatch {
                angles: angles.len(),
                weights: weights.len(),
            });
        }
        if weights.len() < 2 {
            return Err(DomainError::TooFewRays(weights.len()));
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(DomainError::BadWeight { index, value });
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(DomainError::UnnormalizedWeights(total));
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        for (index, &value) in angles.iter().enumerate() {
            let increasing = index == 0 || angles[index - 1] < value;
            if !value.is_finite() || value < 0.0 || value >= two_pi || !increasing {
                return Err(DomainError::BadAngle { index, value });
            }
        }
        Ok(Self { angles, weights })
    }

    /// Builds a measure with the given weights on equally spaced directions.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, DomainError> {
        let m = weights.len().max(1);
        let two_pi = 2.0 * std::f64::consts::PI;
        let angles = (0..weights.len())
            .map(|j| two_pi * j as f64 / m as f64)
            .collect();
        Self::new(angles, weights)
    }

    /// Uniform measure on `m` equally spaced rays.
    pub fn uniform(m: usize) -> Result<Self, DomainError> {
        Self::from_weights(vec![1.0 / m as f64; m])
    }

    /// Number of rays.
    pub fn n_rays(&self) -> usize {
        self.weights.len()
    }

    /// Mass of ray `j`.
    pub fn weight(&self, ray: usize) -> f64 {
        self.weights[ray]
    }

    /// All ray masses, indexed by ray.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Direction of ray `j` in radians.
    pub fn angle(&self, ray: usize) -> f64 {
        self.angles[ray]
    }

    /// Mean of per-ray boundary values against this measure.
    pub fn average(&self, per_ray: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(per_ray)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// Samples a ray index with probability equal to its mass.
    pub fn sample_ray<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (j, &w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return j;
            }
        }
        self.weights.len() - 1
    }
}

/// Origin identification: `Separated` keeps one origin per ray (the space the
/// snapping-out motion lives on); `Glued` identifies all ray origins (the
/// Walsh / darned star).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Separated,
    Glued,
}

/// Point on the star: ray index plus radial coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarPoint {
    pub ray: usize,
    pub r: f64,
}

impl StarPoint {
    /// Builds a point after checking the radius is finite and nonnegative.
    pub fn new(ray: usize, r: f64) -> Result<Self, DomainError> {
        if !r.is_finite() || r < 0.0 {
            return Err(DomainError::BadRadius(r));
        }
        Ok(Self { ray, r })
    }
}

impl Topology {
    /// Point equality under this topology: at the origin, `Glued` ignores the
    /// ray index while `Separated` distinguishes per-ray origins.
    pub fn points_equal(&self, p: StarPoint, q: StarPoint) -> bool {
        if p.r == 0.0 && q.r == 0.0 {
            match self {
                Topology::Glued => true,
                Topology::Separated => p.ray == q.ray,
            }
        } else {
            p.ray == q.ray && p.r == q.r
        }
    }
}

/// Radial translation `r -> r + beta` along the point's own ray.
pub fn shift(point: StarPoint, beta: f64) -> Result<StarPoint, DomainError> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(DomainError::BadShift {
            beta,
            radius: point.r,
        });
    }
    StarPoint::new(point.ray, point.r + beta)
}

/// Inverse of [`shift`]; requires `point.r >= beta`.
pub fn unshift(point: StarPoint, beta: f64) -> Result<StarPoint, DomainError> {
    if !beta.is_finite() || beta < 0.0 || point.r < beta {
        return Err(DomainError::BadShift {
            beta,
            radius: point.r,
        });
    }
    StarPoint::new(point.ray, point.r - beta)
}

/// Projection onto the glued star: origins of all rays map to the canonical
/// representative `(ray 0, r = 0)`; every other point is fixed.
pub fn darning_project(point: StarPoint) -> StarPoint {
    if point.r == 0.0 {
        StarPoint { ray: 0, r: 0.0 }
    } else {
        point
    }
}

/// Piecewise-constant conductivity profile on a collar `[0, epsilon)`.
///
/// Piece `k` has value `values[k]` on `[breakpoints[k], breakpoints[k+1])`;
/// the cached bounds are the extreme piece values. Outside the collar the
/// conductivity is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    lower_bound: f64,
    upper_bound: f64,
}

impl BarrierProfile {
    /// Builds a profile from breakpoints `0 = t0 < ... < tk = epsilon` and one
    /// strictly positive value per piece.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, DomainError> {
        let ok = breakpoints.len() >= 2
            && breakpoints[0] == 0.0
            && breakpoints.windows(2).all(|w| w[0] < w[1])
            && breakpoints.iter().all(|t| t.is_finite());
        if !ok {
            return Err(DomainError::BadBreakpoints(breakpoints));
        }
        if values.len() != breakpoints.len() - 1 {
            return Err(DomainError::PieceMismatch {
                breakpoints: breakpoints.len(),
                expected: breakpoints.len() - 1,
                values: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(DomainError::BadValue { index, value });
            }
        }
        let lower_bound = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let upper_bound = values.iter().cloned().fold(0.0, f64::max);
        Ok(Self {
            breakpoints,
            values,
            lower_bound,
            upper_bound,
        })
    }

    /// Single-piece profile with value `b` on `[0, epsilon)`.
    pub fn uniform(b: f64, epsilon: f64) -> Result<Self, DomainError> {
        Self::new(vec![0.0, epsilon], vec![b])
    }

    /// Power-law family `b = (kappa * epsilon)^(-alpha)`: resistance
    /// `kappa^alpha * epsilon^(1 + alpha)`, so `alpha < -1` blows up,
    /// `alpha = -1` freezes at `1 / kappa`, and `alpha > -1` vanishes
    /// as the collar shrinks.
    pub fn power_law(kappa: f64, alpha: f64, epsilon: f64) -> Result<Self, DomainError> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(DomainError::BadValue {
                index: 0,
                value: kappa,
            });
        }
        Self::uniform((kappa * epsilon).powf(-alpha), epsilon)
    }

    /// Collar width `epsilon` (the last breakpoint).
    pub fn epsilon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Smallest piece value.
    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// Largest piece value.
    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    /// Breakpoints, starting at 0 and ending at `epsilon`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Conductivity at radius `r`: the piece value inside the collar, 1 outside.
    pub fn conductivity(&self, r: f64) -> f64 {
        if r < 0.0 || r >= self.epsilon() {
            return 1.0;
        }
        // partition_point returns the first breakpoint > r; piece index is one less.
        let k = self.breakpoints.partition_point(|&t| t <= r);
        self.values[k - 1]
    }

    /// Resistance `integral over [0, epsilon) of dr / b(r)`, summed exactly
    /// over the constant pieces.
    pub fn resistance(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, b)| (w[1] - w[0]) / b)
            .sum()
    }

    /// Concatenation: this profile on `[0, epsilon)`, then `other` shifted to
    /// `[epsilon, epsilon + other.epsilon())`.
    pub fn concat(&self, other: &BarrierProfile) -> Result<Self, DomainError> {
        let eps = self.epsilon();
        let mut breakpoints = self.breakpoints.clone();
        breakpoints.extend(other.breakpoints.iter().skip(1).map(|t| eps + t));
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Self::new(breakpoints, values)
    }
}
