//! Closed-form quantities for Brownian motion on rays and star graphs.
//!
//! Everything here is an analytic reference the simulators and discrete forms
//! are tested against: exit probabilities and their Laplace transforms on an
//! interval, the two-part hitting kernel of the star process (same-ray atom
//! plus angular remainder), the elastic boundary weight that couples rays
//! through the origin, and direct energy evaluations of the four quadratic
//! forms on grid functions.
//!
//! Numerical care: hyperbolic ratios such as `sinh(s r) / sinh(s a)` overflow
//! for `s a` beyond ~710 if evaluated literally, so they are computed in the
//! exponentially scaled form `exp(s (r - a)) * (1 - e^{-2 s r}) / (1 - e^{-2 s a})`
//! which is stable for all positive arguments.

use crate::domain::AngularMeasure;
use crate::forms::FormKind;
use crate::grid::{DiscreteFunction, Grid, OriginMode};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from closed-form evaluations.
#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("radius {r} outside [0, {a}]")]
    RadiusOutOfRange { r: f64, a: f64 },
    #[error("interval length must be positive and finite, got {0}")]
    BadInterval(f64),
    #[error("rate parameter must be positive and finite, got {0}")]
    BadRate(f64),
    #[error("quadrature needs a positive even panel count, got {0}")]
    BadPanels(usize),
    #[error("function has per-ray origin values where a shared origin is required")]
    SharedOriginRequired,
    #[error("barrier profile does not align with the grid")]
    Misaligned,
    #[error("measure has {measure} rays but function has {function}")]
    RayCountMismatch { measure: usize, function: usize },
}

fn check_interval(r: f64, a: f64) -> Result<(), AnalyticError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(AnalyticError::BadInterval(a));
    }
    if !(0.0..=a).contains(&r) || !r.is_finite() {
        return Err(AnalyticError::RadiusOutOfRange { r, a });
    }
    Ok(())
}

fn check_rate(x: f64) -> Result<(), AnalyticError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(AnalyticError::BadRate(x));
    }
    Ok(())
}

/// `sinh(s x) / sinh(s y)` for `0 <= x <= y`, `s y > 0`, without overflow.
fn sinh_ratio(s: f64, x: f64, y: f64) -> f64 {
    // exp(s(x-y)) * (1 - e^{-2sx}) / (1 - e^{-2sy})
    ((s * (x - y)).exp()) * (-(-2.0 * s * x).exp_m1()) / (-(-2.0 * s * y).exp_m1())
}

/// `1 / cosh(y)` for `y >= 0`, without overflow.
fn sech(y: f64) -> f64 {
    let e = (-y).exp();
    2.0 * e / (1.0 + e * e)
}

/// Laplace-transformed exit functionals of Brownian motion on `[0, a]`
/// started at `r`, at transform parameter `lambda > 0`.
///
/// Returns `(up, down, through)` where, with `s = sqrt(2 lambda)` and
/// `tau_x` the hitting time of `x`:
/// - `up     = E_r[e^{-lambda tau_a}; tau_a < tau_0] = sinh(s r) / sinh(s a)`
/// - `down   = E_r[e^{-lambda tau_0}; tau_0 < tau_a] = sinh(s (a - r)) / sinh(s a)`
/// - `through = E_0[e^{-lambda tau_a}]               = 1 / cosh(s a)`,
///   the transform of the passage from the origin to `a` for the reflected
///   motion.
pub fn bm_exit_laplace(r: f64, a: f64, lambda: f64) -> Result<(f64, f64, f64), AnalyticError> {
    check_interval(r, a)?;
    check_rate(lambda)?;
    let s = (2.0 * lambda).sqrt();
    Ok((
        sinh_ratio(s, r, a),
        sinh_ratio(s, a - r, a),
        sech(s * a),
    ))
}

/// First-exit law of the star process from the ball of radius `a`, read off
/// at the moment the radius first returns to `r` ... see [`hitting_kernel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingKernel {
    /// Probability of exiting on the starting ray without an origin visit.
    pub same_ray_mass: f64,
    /// Probability routed through the origin and spread by the angular
    /// measure: exit-ray distribution is `eta_mixture_mass * eta`.
    pub eta_mixture_mass: f64,
    /// Exit radius the kernel refers to.
    pub radius: f64,
}

/// Exit-ray kernel from start radius `r` to the sphere of radius `a`:
/// an atom `r / a` on the starting ray plus `(1 - r / a)` spread by the
/// angular measure (gambler's ruin on the radial part).
pub fn hitting_kernel(r: f64, a: f64) -> Result<HittingKernel, AnalyticError> {
    check_interval(r, a)?;
    let same = r / a;
    Ok(HittingKernel {
        same_ray_mass: same,
        eta_mixture_mass: 1.0 - same,
        radius: a,
    })
}

/// Laplace-weighted analogue of [`HittingKernel`] at rate `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaKernel {
    /// `E_r[e^{-lambda tau_a}; no origin visit] = sinh(s r) / sinh(s a)`.
    pub same_ray_coeff: f64,
    /// Coefficient of the eta-mixture on exit through the origin:
    /// `sinh(s (a - r)) / (sinh(s a) cosh(s a))`.
    pub eta_coeff: f64,
    pub lambda: f64,
    pub radius: f64,
}

/// Exit kernel weighted by `e^{-lambda tau}`: the same-ray coefficient is the
/// direct passage `r -> a`, and the eta coefficient factors exactly as
/// (passage `r -> 0`) x (reflected passage `0 -> a`).
pub fn lambda_kernel(r: f64, a: f64, lambda: f64) -> Result<LambdaKernel, AnalyticError> {
    let (up, down, through) = bm_exit_laplace(r, a, lambda)?;
    Ok(LambdaKernel {
        same_ray_coeff: up,
        eta_coeff: down * through,
        lambda,
        radius: a,
    })
}

/// The one-parameter family linking the elastic (snapping) process to its
/// trace description: killing rate `kappa` and the matching trace radius
/// `a = 1 / (2 kappa)` at which the flux identity `1 / (4a) = kappa / 2`
/// holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnappingParameter {
    pub kappa: f64,
    pub trace_radius: f64,
}

impl SnappingParameter {
    pub fn from_kappa(kappa: f64) -> Result<Self, AnalyticError> {
        check_rate(kappa)?;
        Ok(Self {
            kappa,
            trace_radius: 0.5 / kappa,
        })
    }

    pub fn from_trace_radius(a: f64) -> Result<Self, AnalyticError> {
        check_rate(a)?;
        Ok(Self {
            kappa: 0.5 / a,
            trace_radius: a,
        })
    }

    /// Coefficient `kappa / 2` of the pairwise origin coupling
    /// `(kappa / 2) * (f_j(0) - f_k(0)) (g_j(0) - g_k(0))`.
    pub fn coupling_coefficient(&self) -> f64 {
        0.5 * self.kappa
    }
}

/// Boundary pair weight `1 / (2a)` of the jump kernel obtained by watching
/// the motion only on the sphere of radius `a`: the strength with which each
/// ordered pair of boundary points is coupled in the limiting flux form.
pub fn feller_pair_weight(a: f64) -> Result<f64, AnalyticError> {
    check_rate(a)?;
    Ok(0.5 / a)
}

/// Radial pairing `lambda * int_0^a [ eta_coeff(r) + same_ray_coeff(r) * (a - r)/a ] dr`
/// evaluated by composite Simpson quadrature with `panels` panels (even).
///
/// This is the off-diagonal boundary pairing of the killed resolvent against
/// harmonic extensions from the sphere of radius `a`; as `lambda -> infinity`
/// it increases to the pair weight `1 / (2a)`, with closed form
/// `1 / (2a) - s / sinh(2 s a)`, `s = sqrt(2 lambda)`.
pub fn feller_lambda_pairing(a: f64, lambda: f64, panels: usize) -> Result<f64, AnalyticError> {
    check_rate(a)?;
    check_rate(lambda)?;
    if panels == 0 || panels % 2 != 0 {
        return Err(AnalyticError::BadPanels(panels));
    }
    let integrand = |r: f64| -> f64 {
        let k = lambda_kernel(r, a, lambda).expect("r in [0, a] by construction");
        k.eta_coeff + k.same_ray_coeff * (a - r) / a
    };
    let h = a / panels as f64;
    let mut acc = integrand(0.0) + integrand(a);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(i as f64 * h);
    }
    Ok(lambda * acc * h / 3.0)
}

/// Closed form of [`feller_lambda_pairing`]: `1/(2a) - s / sinh(2 s a)`.
pub fn feller_lambda_pairing_exact(a: f64, lambda: f64) -> Result<f64, AnalyticError> {
    check_rate(a)?;
    check_rate(lambda)?;
    let s = (2.0 * lambda).sqrt();
    // s / sinh(2sa) = 2 s e^{-2sa} / (1 - e^{-4sa}), stable for large s a
    let e = (-2.0 * s * a).exp();
    Ok(0.5 / a - 2.0 * s * e / (1.0 - e * e))
}

/// Energy of a grid function under one of the quadratic forms, evaluated
/// directly from differences (midpoint conductivity per cell, trapezoid-free:
/// the Dirichlet part is exact for the piecewise-linear interpolant).
///
/// Walsh and barrier require a shared origin; reflecting and snapping accept
/// either mode (a shared-origin function is a valid per-ray one).
pub fn form_energy(
    kind: &FormKind,
    f: &DiscreteFunction,
    grid: &Grid,
    measure: &AngularMeasure,
) -> Result<f64, AnalyticError> {
    if measure.n_rays() != grid.n_rays() || f.values().len() != grid.n_rays() {
        return Err(AnalyticError::RayCountMismatch {
            measure: measure.n_rays(),
            function: f.values().len(),
        });
    }
    match kind {
        FormKind::Walsh | FormKind::Barrier(_) => {
            if f.origin_mode() != OriginMode::Shared {
                return Err(AnalyticError::SharedOriginRequired);
            }
        }
        FormKind::Reflecting | FormKind::Snapping(_) => {}
    }
    if let FormKind::Barrier(profile) = kind {
        if !grid.aligns_with(profile) {
            return Err(AnalyticError::Misaligned);
        }
    }

    let h = grid.spacing();
    let mut energy = 0.0;
    for j in 0..grid.n_rays() {
        let w = measure.weight(j);
        let mut ray_sum = 0.0;
        for i in 0..grid.nodes_per_ray() - 1 {
            let a_cell = match kind {
                FormKind::Barrier(profile) => profile.conductivity(grid.node_r(i) + 0.5 * h),
                _ => 1.0,
            };
            let d = f.value(j, i + 1) - f.value(j, i);
            ray_sum += a_cell * d * d / h;
        }
        energy += 0.5 * w * ray_sum;
    }
    if let FormKind::Snapping(kappa) = kind {
        let origins = f.origin_values();
        let mut coupling = 0.0;
        for j in 0..origins.len() {
            for k in 0..origins.len() {
                let d = origins[j] - origins[k];
                coupling += measure.weight(j) * measure.weight(k) * d * d;
            }
        }
        energy += 0.5 * kappa * coupling;
    }
    Ok(energy)
}

/// Pointwise energy density `(df/dr)^2` per cell: `out[ray][cell]`, the
/// squared difference quotient over cell `[r_i, r_{i+1})`.
pub fn energy_measure_density(f: &DiscreteFunction, grid: &Grid) -> Vec<Vec<f64>> {
    let h = grid.spacing();
    f.values()
        .iter()
        .map(|ray| {
            ray.windows(2)
                .map(|pair| {
                    let q = (pair[1] - pair[0]) / h;
                    q * q
                })
                .collect()
        })
        .collect()
}
