//! Two-sample statistical tests used to compare synthetic against real
//! feature distributions, plus the paired t-test used when comparing
//! experiment arms across replications.

pub mod special;

use crate::error::{Error, Result};
use special::{f_cdf, kolmogorov_sf, t_cdf};

/// Statistic and two-sided p-value of a test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Welch's unequal-variance two-sample t-test, two-sided.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::DegenerateSamples(
            "t-test needs at least 2 points per sample".into(),
        ));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_variance(a), sample_variance(b));
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        return Err(Error::DegenerateSamples(
            "both samples have zero variance".into(),
        ));
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    // Welch-Satterthwaite degrees of freedom.
    let df = se2 * se2
        / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    let p = 2.0 * (1.0 - t_cdf(t.abs(), df));
    Ok(TestResult {
        statistic: t,
        p_value: p.clamp(0.0, 1.0),
    })
}

/// Paired t-test on matched observations, two-sided.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            location: "paired t-test samples".into(),
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::DegenerateSamples(
            "paired t-test needs at least 2 pairs".into(),
        ));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len() as f64;
    let sd = sample_variance(&diffs).sqrt();
    if sd == 0.0 {
        // All differences identical; the test is exact.
        let p = if mean(&diffs) == 0.0 { 1.0 } else { 0.0 };
        return Ok(TestResult {
            statistic: if mean(&diffs) == 0.0 { 0.0 } else { f64::INFINITY },
            p_value: p,
        });
    }
    let t = mean(&diffs) / (sd / n.sqrt());
    let p = 2.0 * (1.0 - t_cdf(t.abs(), n - 1.0));
    Ok(TestResult {
        statistic: t,
        p_value: p.clamp(0.0, 1.0),
    })
}

/// Levene's test for equal variances with group-median centering
/// (the Brown-Forsythe variant). Two groups, F statistic.
pub fn levene_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::DegenerateSamples(
            "Levene test needs at least 2 points per sample".into(),
        ));
    }
    let za: Vec<f64> = {
        let m = median(a);
        a.iter().map(|x| (x - m).abs()).collect()
    };
    let zb: Vec<f64> = {
        let m = median(b);
        b.iter().map(|x| (x - m).abs()).collect()
    };
    let (na, nb) = (za.len() as f64, zb.len() as f64);
    let n = na + nb;
    let (ma, mb) = (mean(&za), mean(&zb));
    let grand = (na * ma + nb * mb) / n;
    let ss_between = na * (ma - grand) * (ma - grand) + nb * (mb - grand) * (mb - grand);
    let ss_within: f64 = za.iter().map(|z| (z - ma) * (z - ma)).sum::<f64>()
        + zb.iter().map(|z| (z - mb) * (z - mb)).sum::<f64>();
    if ss_within == 0.0 {
        if ss_between == 0.0 {
            // Identical spread patterns; no evidence of unequal variance.
            return Ok(TestResult {
                statistic: 0.0,
                p_value: 1.0,
            });
        }
        return Err(Error::DegenerateSamples(
            "Levene test: zero within-group deviation".into(),
        ));
    }
    let f = (n - 2.0) * ss_between / ss_within;
    let p = 1.0 - f_cdf(f, 1.0, n - 2.0);
    Ok(TestResult {
        statistic: f,
        p_value: p.clamp(0.0, 1.0),
    })
}

/// Two-sample Kolmogorov-Smirnov test. The statistic is the supremum gap
/// between the empirical CDFs; the p-value uses the asymptotic Kolmogorov
/// distribution with the effective-size correction
/// `lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * D`.
pub fn ks_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("ks_test sample".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n1, n2) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let x = xs[i];
        let y = ys[j];
        let t = x.min(y);
        while i < n1 && xs[i] <= t {
            i += 1;
        }
        while j < n2 && ys[j] <= t {
            j += 1;
        }
        let gap = (i as f64 / n1 as f64 - j as f64 / n2 as f64).abs();
        if gap > d {
            d = gap;
        }
    }
    let ne = (n1 as f64 * n2 as f64) / (n1 as f64 + n2 as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn normal(rng: &mut impl Rng) -> f64 {
        // Marsaglia polar, one value per call.
        loop {
            let u = 2.0 * rng.random::<f64>() - 1.0;
            let v = 2.0 * rng.random::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }

    #[test]
    fn t_test_identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = welch_t_test(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn t_test_detects_shift() {
        let mut rng = stream(11, "t-shift", 0);
        let a: Vec<f64> = (0..100).map(|_| normal(&mut rng)).collect();
        let b: Vec<f64> = (0..100).map(|_| normal(&mut rng) + 2.0).collect();
        let r = welch_t_test(&a, &b).unwrap();
        assert!(r.p_value < 0.001, "p = {}", r.p_value);
    }

    #[test]
    fn t_test_zero_variance_pair_is_degenerate() {
        let a = [1.0, 1.0, 1.0];
        let b = [2.0, 2.0];
        assert!(matches!(
            welch_t_test(&a, &b),
            Err(Error::DegenerateSamples(_))
        ));
    }

    #[test]
    fn levene_identical_samples() {
        let a = [1.0, 5.0, 2.0, 8.0];
        let r = levene_test(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn levene_detects_variance_ratio() {
        let mut rng = stream(12, "levene-power", 0);
        let a: Vec<f64> = (0..200).map(|_| normal(&mut rng)).collect();
        let b: Vec<f64> = (0..200).map(|_| 3.0 * normal(&mut rng)).collect();
        let r = levene_test(&a, &b).unwrap();
        assert!(r.p_value < 0.01, "p = {}", r.p_value);
    }

    #[test]
    fn ks_identical_samples() {
        let a = [0.0, 0.5, 1.0, 2.0];
        let r = ks_test(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn ks_detects_location_shift() {
        // U[0,1] vs U[0.5,1.5]: the true CDF gap is 0.5.
        let mut rng = stream(13, "ks-power", 0);
        let a: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..200).map(|_| rng.random::<f64>() + 0.5).collect();
        let r = ks_test(&a, &b).unwrap();
        assert!((r.statistic - 0.5).abs() < 0.1, "D = {}", r.statistic);
        assert!(r.p_value < 0.01, "p = {}", r.p_value);
    }

    #[test]
    fn paired_t_identical_is_unit_p() {
        let a = [1.0, 2.0, 3.0];
        let r = paired_t_test(&a, &a).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn paired_t_detects_consistent_difference() {
        let a: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 1.0 + 0.01 * (x * 37.0).sin()).collect();
        let r = paired_t_test(&a, &b).unwrap();
        assert!(r.p_value < 1e-6);
    }

    // Null calibration at moderate replication counts; the acceptance suite
    // runs the full 2000-replication version.
    #[test]
    fn null_rejection_rates_are_calibrated() {
        let mut reject_t = 0;
        let mut reject_lev = 0;
        let mut reject_ks = 0;
        let reps = 600;
        for i in 0..reps {
            let mut rng = stream(99, "null-calib", i);
            let a: Vec<f64> = (0..100).map(|_| normal(&mut rng)).collect();
            let b: Vec<f64> = (0..100).map(|_| normal(&mut rng)).collect();
            if welch_t_test(&a, &b).unwrap().p_value < 0.05 {
                reject_t += 1;
            }
            if levene_test(&a, &b).unwrap().p_value < 0.05 {
                reject_lev += 1;
            }
            if ks_test(&a, &b).unwrap().p_value < 0.05 {
                reject_ks += 1;
            }
        }
        let band = 0.025..=0.085;
        for (name, count) in [("t", reject_t), ("levene", reject_lev), ("ks", reject_ks)] {
            let rate = f64::from(count) / reps as f64;
            assert!(band.contains(&rate), "{name} type-I rate {rate}");
        }
    }
}
