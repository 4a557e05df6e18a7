//! Uniform radial grids on the star and grid functions over them.
//!
//! Every ray carries the same `nodes_per_ray` nodes at spacing `h`, truncating
//! the rays at `L = (nodes_per_ray - 1) * h` with a reflecting (Neumann) outer
//! end. Shared-origin functions carry one value at the origin (the glued star,
//! where Walsh and barrier forms live); per-ray-origin functions keep one
//! origin value per ray (the separated star of reflecting and snapping forms).

use crate::domain::{AngularMeasure, BarrierProfile};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Validation errors for grids and grid functions.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid needs at least two rays, got {0}")]
    TooFewRays(usize),
    #[error("grid needs at least three nodes per ray, got {0}")]
    TooFewNodes(usize),
    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("value array is {rays} x {nodes}, expected {expected_rays} x {expected_nodes}")]
    ShapeMismatch {
        rays: usize,
        nodes: usize,
        expected_rays: usize,
        expected_nodes: usize,
    },
    #[error("shared-origin function has differing origin values ({0} vs {1})")]
    UnsharedOrigin(f64, f64),
    #[error("value must be finite, got {0} at ray {1}, node {2}")]
    NonFinite(f64, usize, usize),
    #[error("measure has {measure} rays but grid has {grid}")]
    RayCountMismatch { measure: usize, grid: usize },
}

/// Uniform radial grid: `n_rays` rays, `nodes_per_ray` nodes at spacing `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_rays: usize,
    nodes_per_ray: usize,
    spacing: f64,
}

impl Grid {
    /// Builds a grid after validating ray count, node count and spacing.
    pub fn new(n_rays: usize, nodes_per_ray: usize, spacing: f64) -> Result<Self, GridError> {
        if n_rays < 2 {
            return Err(GridError::TooFewRays(n_rays));
        }
        if nodes_per_ray < 3 {
            return Err(GridError::TooFewNodes(nodes_per_ray));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(GridError::BadSpacing(spacing));
        }
        Ok(Self {
            n_rays,
            nodes_per_ray,
            spacing,
        })
    }

    pub fn n_rays(&self) -> usize {
        self.n_rays
    }

    pub fn nodes_per_ray(&self) -> usize {
        self.nodes_per_ray
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Truncation radius `L` of every ray.
    pub fn outer_radius(&self) -> f64 {
        (self.nodes_per_ray - 1) as f64 * self.spacing
    }

    /// Radius of node `i`.
    pub fn node_r(&self, i: usize) -> f64 {
        i as f64 * self.spacing
    }

    /// Nearest node index for an aligned radius (within `1e-9 * h`), if any.
    pub fn node_index(&self, r: f64) -> Option<usize> {
        let x = r / self.spacing;
        let i = x.round();
        if (x - i).abs() <= 1e-9 && i >= 0.0 && (i as usize) < self.nodes_per_ray {
            Some(i as usize)
        } else {
            None
        }
    }

    /// True when every profile breakpoint falls on a node and the collar fits
    /// strictly inside the truncated ray.
    pub fn aligns_with(&self, profile: &BarrierProfile) -> bool {
        profile.epsilon() < self.outer_radius()
            && profile
                .breakpoints()
                .iter()
                .all(|&t| self.node_index(t).is_some())
    }
}

/// Origin treatment of a grid function: one glued value or one value per ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OriginMode {
    Shared,
    PerRay,
}

/// Function sampled on a [`Grid`]: `values[ray][node]`.
///
/// In `Shared` mode all rays hold bit-identical origin values (enforced at
/// construction), so the glued origin is represented redundantly but uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction {
    values: Vec<Vec<f64>>,
    origin_mode: OriginMode,
}

impl DiscreteFunction {
    /// Wraps a value array after shape, finiteness and origin checks.
    pub fn new(
        grid: &Grid,
        origin_mode: OriginMode,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, GridError> {
        if values.len() != grid.n_rays() || values.iter().any(|v| v.len() != grid.nodes_per_ray())
        {
            return Err(GridError::ShapeMismatch {
                rays: values.len(),
                nodes: values.first().map_or(0, |v| v.len()),
                expected_rays: grid.n_rays(),
                expected_nodes: grid.nodes_per_ray(),
            });
        }
        for (j, ray) in values.iter().enumerate() {
            for (i, &v) in ray.iter().enumerate() {
                if !v.is_finite() {
                    return Err(GridError::NonFinite(v, j, i));
                }
            }
        }
        if origin_mode == OriginMode::Shared {
            let v0 = values[0][0];
            for ray in &values {
                if ray[0] != v0 {
                    return Err(GridError::UnsharedOrigin(v0, ray[0]));
                }
            }
        }
        Ok(Self {
            values,
            origin_mode,
        })
    }

    /// Samples `f(ray, r)` on the grid. In `Shared` mode the origin value is
    /// taken from ray 0 and copied to every ray.
    pub fn from_fn(
        grid: &Grid,
        origin_mode: OriginMode,
        f: impl Fn(usize, f64) -> f64,
    ) -> Result<Self, GridError> {
        let mut values = vec![vec![0.0; grid.nodes_per_ray()]; grid.n_rays()];
        for (j, ray) in values.iter_mut().enumerate() {
            for (i, slot) in ray.iter_mut().enumerate() {
                *slot = f(j, grid.node_r(i));
            }
        }
        if origin_mode == OriginMode::Shared {
            let v0 = values[0][0];
            for ray in values.iter_mut() {
                ray[0] = v0;
            }
        }
        Self::new(grid, origin_mode, values)
    }

    pub fn origin_mode(&self) -> OriginMode {
        self.origin_mode
    }

    pub fn value(&self, ray: usize, node: usize) -> f64 {
        self.values[ray][node]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.values
    }

    /// Origin values per ray (all equal in `Shared` mode).
    pub fn origin_values(&self) -> Vec<f64> {
        self.values.iter().map(|ray| ray[0]).collect()
    }

    /// Projects onto shared-origin form by replacing every origin value with
    /// the measure average of the per-ray origin values.
    pub fn to_shared(&self, measure: &AngularMeasure) -> Result<Self, GridError> {
        if measure.n_rays() != self.values.len() {
            return Err(GridError::RayCountMismatch {
                measure: measure.n_rays(),
                grid: self.values.len(),
            });
        }
        let origin = measure.average(&self.origin_values());
        let mut values = self.values.clone();
        for ray in values.iter_mut() {
            ray[0] = origin;
        }
        Ok(Self {
            values,
            origin_mode: OriginMode::Shared,
        })
    }

    /// Reinterprets the same values with per-ray origins (always valid).
    pub fn to_per_ray(&self) -> Self {
        Self {
            values: self.values.clone(),
            origin_mode: OriginMode::PerRay,
        }
    }
}

/// Weighted L2 norm of `f` under the trapezoidal quadrature of `dr x eta`.
pub fn l2_norm(f: &DiscreteFunction, grid: &Grid, measure: &AngularMeasure) -> f64 {
    l2_distance_impl(f, None, grid, measure, false)
}

/// Weighted L2 distance between two grid functions.
pub fn l2_distance(
    f: &DiscreteFunction,
    g: &DiscreteFunction,
    grid: &Grid,
    measure: &AngularMeasure,
) -> f64 {
    l2_distance_impl(f, Some(g), grid, measure, false)
}

/// Weighted L2 distance skipping the origin node, for comparing functions
/// whose origin conventions differ (shared vs per-ray).
pub fn l2_distance_excluding_origin(
    f: &DiscreteFunction,
    g: &DiscreteFunction,
    grid: &Grid,
    measure: &AngularMeasure,
) -> f64 {
    l2_distance_impl(f, Some(g), grid, measure, true)
}

fn l2_distance_impl(
    f: &DiscreteFunction,
    g: Option<&DiscreteFunction>,
    grid: &Grid,
    measure: &AngularMeasure,
    skip_origin: bool,
) -> f64 {
    let h = grid.spacing();
    let n = grid.nodes_per_ray();
    let first = if skip_origin { 1 } else { 0 };
    let mut total = 0.0;
    for j in 0..grid.n_rays() {
        let w = measure.weight(j);
        let mut ray_sum = 0.0;
        for i in first..n {
            let d = match g {
                Some(g) => f.value(j, i) - g.value(j, i),
                None => f.value(j, i),
            };
            // trapezoidal node mass: half cells at both ends of the ray
            let mass = if i == 0 || i == n - 1 { 0.5 * h } else { h };
            ray_sum += mass * d * d;
        }
        total += w * ray_sum;
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_geometry_is_consistent() {
        let grid = Grid::new(4, 11, 0.1).unwrap();
        assert_relative_eq!(grid.outer_radius(), 1.0, epsilon = 1e-15);
        assert_eq!(grid.node_index(0.3), Some(3));
        assert_eq!(grid.node_index(0.35), None);
        assert_eq!(grid.node_index(1.2), None);
        assert!(Grid::new(1, 11, 0.1).is_err());
        assert!(Grid::new(4, 2, 0.1).is_err());
        assert!(Grid::new(4, 11, 0.0).is_err());
    }

    #[test]
    fn alignment_requires_breakpoints_on_nodes() {
        let grid = Grid::new(4, 101, 0.01).unwrap();
        let aligned = BarrierProfile::new(vec![0.0, 0.05, 0.1], vec![2.0, 4.0]).unwrap();
        let misaligned = BarrierProfile::new(vec![0.0, 0.055, 0.1], vec![2.0, 4.0]).unwrap();
        let too_wide = BarrierProfile::uniform(1.0, 1.5).unwrap();
        assert!(grid.aligns_with(&aligned));
        assert!(!grid.aligns_with(&misaligned));
        assert!(!grid.aligns_with(&too_wide));
    }

    #[test]
    fn shared_origin_is_enforced_and_projected() {
        let grid = Grid::new(3, 4, 0.5).unwrap();
        let eta = AngularMeasure::from_weights(vec![0.5, 0.25, 0.25]).unwrap();
        let f = DiscreteFunction::from_fn(&grid, OriginMode::PerRay, |j, r| j as f64 + r).unwrap();
        assert!(DiscreteFunction::new(&grid, OriginMode::Shared, f.values().to_vec()).is_err());

        let shared = f.to_shared(&eta).unwrap();
        // eta-average of (0, 1, 2) under weights (1/2, 1/4, 1/4)
        assert_relative_eq!(shared.value(2, 0), 0.75, epsilon = 1e-15);
        assert_eq!(shared.value(0, 0), shared.value(1, 0));
        // off-origin values untouched
        assert_eq!(shared.value(1, 2), f.value(1, 2));

        let back = shared.to_per_ray();
        assert_eq!(back.origin_mode(), OriginMode::PerRay);
        assert_eq!(back.values(), shared.values());
    }

    #[test]
    fn l2_norm_matches_hand_quadrature() {
        let grid = Grid::new(2, 3, 0.5).unwrap();
        let eta = AngularMeasure::uniform(2).unwrap();
        // f = 1 everywhere: squared norm = total mass = sum of ray lengths
        // under trapezoid = 1.0 per ray, eta-weighted to 1.0.
        let one = DiscreteFunction::from_fn(&grid, OriginMode::Shared, |_, _| 1.0).unwrap();
        assert_relative_eq!(l2_norm(&one, &grid, &eta), 1.0, epsilon = 1e-14);

        let zero = DiscreteFunction::from_fn(&grid, OriginMode::Shared, |_, _| 0.0).unwrap();
        assert_relative_eq!(
            l2_distance(&one, &zero, &grid, &eta),
            1.0,
            epsilon = 1e-14
        );
        // skipping the origin removes half a cell of mass per ray
        let trimmed = l2_distance_excluding_origin(&one, &zero, &grid, &eta);
        assert_relative_eq!(trimmed, (1.0f64 - 0.25).sqrt(), epsilon = 1e-14);
    }
}
