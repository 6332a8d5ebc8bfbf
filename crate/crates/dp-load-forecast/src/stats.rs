//! Small statistics toolbox: order statistics for zone summaries and a
//! two-sample Kolmogorov–Smirnov test used to verify that summed gamma
//! shares are distributed like direct Laplace draws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Five-number summary plus mean and an outlier count below a floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub count: usize,
    pub gaps: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Readings strictly below the configured floor.
    pub outliers_below_floor: usize,
    pub floor: f64,
}

/// Linear-interpolation quantile of an ascending-sorted slice
/// (R type 7: h = (n-1)q).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::domain("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("quantile level {q} outside [0, 1]")));
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Summary of the present readings of a sample; `gaps` counts the missing
/// ones the caller removed.
pub fn summarize(values: &[f64], gaps: usize, floor: f64) -> Result<SeriesSummary> {
    if values.is_empty() {
        return Err(Error::domain("summary of an empty sample"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite reading"));
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    Ok(SeriesSummary {
        count: sorted.len(),
        gaps,
        mean,
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25)?,
        median: quantile_sorted(&sorted, 0.5)?,
        q3: quantile_sorted(&sorted, 0.75)?,
        max: sorted[sorted.len() - 1],
        outliers_below_floor: sorted.iter().take_while(|&&v| v < floor).count(),
        floor,
    })
}

/// Outcome of a two-sample Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Copy)]
pub struct KsTest {
    /// Supremum distance between the two empirical CDFs.
    pub statistic: f64,
    /// Asymptotic p-value (Kolmogorov distribution with the usual
    /// small-sample correction).
    pub p_value: f64,
}

impl KsTest {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value > significance
    }
}

/// Two-sample KS test. Sorts copies of both samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("KS test requires two nonempty samples"));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).expect("non-finite sample"));
    ys.sort_by(|p, q| p.partial_cmp(q).expect("non-finite sample"));

    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xs[i].min(ys[j]);
        while i < n && xs[i] <= x {
            i += 1;
        }
        while j < m && ys[j] <= x {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        d = d.max(diff);
    }

    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    Ok(KsTest {
        statistic: d,
        p_value: kolmogorov_q(lambda),
    })
}

/// Complementary CDF of the Kolmogorov distribution,
/// Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² λ²).
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let a2 = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 1.0;
    let mut prev_term = 0.0_f64;
    for j in 1..=100 {
        let term = sign * ((a2 * (j * j) as f64).exp());
        sum += term;
        if term.abs() <= 1e-12 * sum.abs() || term.abs() <= 1e-14 * prev_term {
            return (2.0 * sum).clamp(0.0, 1.0);
        }
        prev_term = term.abs();
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn quantiles_interpolate_linearly() {
        // Brute-force order-statistics oracle: values equal positions.
        let sample: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((quantile_sorted(&sample, 0.5).unwrap() - 50.5).abs() < 1e-12);
        assert!((quantile_sorted(&sample, 0.25).unwrap() - 25.75).abs() < 1e-12);
        assert!((quantile_sorted(&sample, 0.75).unwrap() - 75.25).abs() < 1e-12);
    }

    #[test]
    fn constant_sample_summary_is_constant() {
        let s = summarize(&[3.5; 10], 0, 0.0).unwrap();
        for v in [s.mean, s.min, s.q1, s.median, s.q3, s.max] {
            assert_eq!(v, 3.5);
        }
        assert_eq!(s.outliers_below_floor, 0);
    }

    #[test]
    fn outlier_floor_counts_low_readings() {
        let s = summarize(&[0.0, 0.5, 2.0, 3.0], 1, 1.0).unwrap();
        assert_eq!(s.outliers_below_floor, 2);
        assert_eq!(s.gaps, 1);
    }

    #[test]
    fn ks_accepts_same_distribution_and_rejects_shifted() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let a: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        let same = ks_two_sample(&a, &b).unwrap();
        assert!(same.passes(0.01), "p = {}", same.p_value);

        let shifted: Vec<f64> = b.iter().map(|v| v + 0.2).collect();
        let diff = ks_two_sample(&a, &shifted).unwrap();
        assert!(diff.p_value < 1e-6, "p = {}", diff.p_value);
    }

    #[test]
    fn ks_statistic_matches_hand_computation() {
        // F1 jumps at 1,2; F2 jumps at 1.5,2.5 -> max gap 0.5 at x in [1,1.5).
        let t = ks_two_sample(&[1.0, 2.0], &[1.5, 2.5]).unwrap();
        assert!((t.statistic - 0.5).abs() < 1e-12);
    }
}
