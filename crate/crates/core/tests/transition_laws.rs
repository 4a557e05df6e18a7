//! Distributional checks of the elementary simulation steps against
//! closed-form transition laws.

use rand::Rng;
use walsh_core::domain::{AngularMeasure, StarPoint};
use walsh_core::montecarlo::{
    chi_square, ks_statistic, normal_cdf, path_stream, reflected_step, wbm_marginal_at, SimConfig,
};

/// CDF of |r + sqrt(dt) Z| for Z standard normal.
fn reflected_transition_cdf(r: f64, dt: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s = dt.sqrt();
    normal_cdf((x - r) / s) - normal_cdf((-x - r) / s)
}

#[test]
fn reflected_step_matches_the_transition_cdf_across_the_parameter_grid() {
    let n = 1_000_000usize;
    for (combo, &(r, dt)) in [
        (0.0, 0.01),
        (0.0, 0.5),
        (0.5, 0.01),
        (0.5, 0.5),
        (2.0, 0.01),
        (2.0, 0.5),
    ]
    .iter()
    .enumerate()
    {
        let mut rng = path_stream(1810, combo as u64);
        let mut samples: Vec<f64> = (0..n).map(|_| reflected_step(r, dt, &mut rng).0).collect();
        let ks = ks_statistic(&mut samples, |x| reflected_transition_cdf(r, dt, x));
        assert!(
            ks < 2e-3,
            "KS {ks:.2e} for start {r}, step {dt} exceeds 2e-3"
        );
    }
}

#[test]
fn reflected_step_origin_hits_certain_from_zero_and_absent_far_away() {
    let mut rng = path_stream(1811, 0);
    for _ in 0..200 {
        let (_, hit) = reflected_step(0.0, 0.01, &mut rng);
        assert!(hit, "a step started at the origin always carries a hit");
    }
    for _ in 0..200 {
        let (next, hit) = reflected_step(5.0, 1e-4, &mut rng);
        assert!(!hit, "crossing five sigmas down in one step (to {next})");
    }
}

#[test]
fn wbm_ray_distribution_is_stationary_from_the_origin() {
    let measure = AngularMeasure::from_weights(vec![0.4, 0.35, 0.25]).unwrap();
    for (i, &t) in [0.25, 1.0].iter().enumerate() {
        let config = SimConfig {
            dt: 1e-3,
            horizon: t,
            n_paths: 30_000,
            seed: 1900 + i as u64,
            kappa: None,
            outer_radius: None,
        };
        let points = wbm_marginal_at(StarPoint { ray: 0, r: 0.0 }, &measure, &config).unwrap();
        let mut counts = vec![0u64; measure.n_rays()];
        for p in &points {
            counts[p.ray] += 1;
        }
        let expected: Vec<f64> = (0..measure.n_rays())
            .map(|j| measure.weight(j) * points.len() as f64)
            .collect();
        let outcome = chi_square(&counts, &expected).unwrap();
        assert!(
            outcome.p_value > 0.01,
            "ray occupancy at time {t} drifted from the angular weights: \
             counts {counts:?}, p = {:.4}",
            outcome.p_value
        );
    }
}

#[test]
fn repeated_runs_with_one_seed_are_bit_identical() {
    let measure = AngularMeasure::uniform(4).unwrap();
    let config = SimConfig {
        dt: 1e-3,
        horizon: 0.5,
        n_paths: 400,
        seed: 2024,
        kappa: None,
        outer_radius: None,
    };
    let a = wbm_marginal_at(StarPoint { ray: 2, r: 0.3 }, &measure, &config).unwrap();
    let b = wbm_marginal_at(StarPoint { ray: 2, r: 0.3 }, &measure, &config).unwrap();
    assert_eq!(a, b);
    let mut rng = path_stream(2024, 7);
    let first: Vec<f64> = (0..32).map(|_| rng.random::<f64>()).collect();
    let mut rng = path_stream(2024, 7);
    let second: Vec<f64> = (0..32).map(|_| rng.random::<f64>()).collect();
    assert_eq!(first, second, "path streams must be pure in (seed, index)");
}
