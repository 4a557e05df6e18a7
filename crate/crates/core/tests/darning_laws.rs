//! Collapsing all rebirth bookkeeping of the elastic walk onto the star
//! graph ("darning" the origin) must reproduce the Walsh law exactly,
//! whatever the rebirth rate: the radial part is one reflecting Brownian
//! motion throughout, and every ray choice is an independent draw from the
//! angular measure.

use walsh_core::domain::AngularMeasure;
use walsh_core::montecarlo::{
    chi_square, ks_statistic, ks_two_sample, normal_cdf, snowb_darned_marginal, SimConfig,
};

fn half_normal_cdf(t: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            2.0 * normal_cdf(x / t.sqrt()) - 1.0
        }
    }
}

#[test]
fn darned_marginal_is_walsh_for_every_rebirth_rate() {
    let measure = AngularMeasure::from_weights(vec![0.5, 0.3, 0.2]).unwrap();
    let n = 20_000usize;
    let mut radial_by_rate: Vec<Vec<f64>> = Vec::new();

    for (i, &kappa) in [0.5, 1.0, 4.0, 1000.0].iter().enumerate() {
        let config = SimConfig {
            dt: 1e-3,
            horizon: 1.0,
            n_paths: n,
            seed: 7100 + i as u64,
            kappa: Some(kappa),
            outer_radius: None,
        };
        let points = snowb_darned_marginal(&measure, &config).unwrap();

        let mut radii: Vec<f64> = points.iter().map(|p| p.r).collect();
        let ks = ks_statistic(&mut radii, half_normal_cdf(1.0));
        assert!(
            ks < 0.012,
            "rate {kappa}: radial law at time 1 drifted from |N(0,1)|, KS {ks:.4}"
        );
        radial_by_rate.push(radii);

        let mut counts = vec![0u64; measure.n_rays()];
        for p in &points {
            counts[p.ray] += 1;
        }
        let expected: Vec<f64> = (0..measure.n_rays())
            .map(|j| measure.weight(j) * n as f64)
            .collect();
        let outcome = chi_square(&counts, &expected).unwrap();
        assert!(
            outcome.p_value > 0.01,
            "rate {kappa}: ray occupancy deviates from the angular weights: {counts:?}, p = {:.4}",
            outcome.p_value
        );
    }

    // slowest against fastest rebirth regime: same radial law
    let (slow, fast) = (radial_by_rate.first().cloned(), radial_by_rate.last().cloned());
    let ks = ks_two_sample(&mut slow.unwrap(), &mut fast.unwrap());
    assert!(
        ks < 0.0165,
        "radial law must not depend on the rebirth rate, two-sample KS {ks:.4}"
    );
}
