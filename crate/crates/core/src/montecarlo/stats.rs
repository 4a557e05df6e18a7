//! Distribution-comparison statistics for validating empirical laws.

use super::McError;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov-Smirnov sup-distance between the empirical CDF of `samples`
/// (sorted in place) and a reference CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty(), "KS needs at least one sample");
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov sup-distance (both samples sorted in place).
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "KS needs nonempty samples");
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        // consume every sample tied at the current smallest value before
        // measuring, so ties count as one evaluation point
        let v = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
}

/// Chi-square test of observed counts against expected counts, with `k - 1`
/// degrees of freedom.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> Result<ChiSquareOutcome, McError> {
    if observed.len() != expected.len() {
        return Err(McError::LengthMismatch {
            left: observed.len(),
            right: expected.len(),
        });
    }
    if observed.len() < 2 {
        return Err(McError::EmptySample);
    }
    if expected.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(McError::BadExpected);
    }
    let statistic: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let dof = observed.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("dof >= 1");
    let p_value = (1.0 - dist.cdf(statistic)).clamp(0.0, 1.0);
    Ok(ChiSquareOutcome {
        statistic,
        p_value,
        dof,
    })
}

/// Standard error of a binomial frequency estimate.
pub fn binomial_se(p_hat: f64, n: usize) -> f64 {
    (p_hat * (1.0 - p_hat) / n as f64).max(0.0).sqrt()
}
