//! Per-feature min-max scaling into [0,1]. Counts are never normalized;
//! only the feature columns are.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationStats {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl NormalizationStats {
    /// Column-wise min/max over a feature matrix.
    pub fn fit(features: &[Vec<f64>]) -> Result<Self> {
        let first = features
            .first()
            .ok_or_else(|| Error::EmptyInput("normalization".into()))?;
        let fs = first.len();
        let mut mins = vec![f64::INFINITY; fs];
        let mut maxs = vec![f64::NEG_INFINITY; fs];
        for row in features {
            for j in 0..fs {
                mins[j] = mins[j].min(row[j]);
                maxs[j] = maxs[j].max(row[j]);
            }
        }
        Ok(NormalizationStats { mins, maxs })
    }

    pub fn feature_count(&self) -> usize {
        self.mins.len()
    }

    /// Maps one value into [0,1]. Degenerate columns (max == min) map to 0.
    pub fn apply(&self, j: usize, x: f64) -> f64 {
        let range = self.maxs[j] - self.mins[j];
        if range == 0.0 {
            0.0
        } else {
            (x - self.mins[j]) / range
        }
    }

    /// Inverse of [`NormalizationStats::apply`] for non-degenerate columns.
    pub fn invert(&self, j: usize, u: f64) -> f64 {
        self.mins[j] + u * (self.maxs[j] - self.mins[j])
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(j, &x)| self.apply(j, x)).collect()
    }

    pub fn invert_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(j, &u)| self.invert(j, u)).collect()
    }
}

/// Normalizes a feature matrix, either fitting fresh stats or reusing the
/// supplied ones (test-time consistency). Returns the scaled matrix and
/// the stats in force.
pub fn normalize(
    features: &[Vec<f64>],
    stats: Option<NormalizationStats>,
) -> Result<(Vec<Vec<f64>>, NormalizationStats)> {
    let stats = match stats {
        Some(s) => s,
        None => NormalizationStats::fit(features)?,
    };
    let scaled = features.iter().map(|row| stats.apply_row(row)).collect();
    Ok((scaled, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_max_arithmetic() {
        let features = vec![vec![2.0], vec![4.0], vec![6.0]];
        let (scaled, stats) = normalize(&features, None).unwrap();
        assert_eq!(scaled, vec![vec![0.0], vec![0.5], vec![1.0]]);
        assert_eq!(stats.mins, vec![2.0]);
        assert_eq!(stats.maxs, vec![6.0]);
    }

    #[test]
    fn degenerate_column_maps_to_zero() {
        let features = vec![vec![5.0], vec![5.0]];
        let (scaled, _) = normalize(&features, None).unwrap();
        assert_eq!(scaled, vec![vec![0.0], vec![0.0]]);
    }

    #[test]
    fn round_trip_within_tolerance() {
        let features = vec![vec![1.5, -3.0], vec![0.25, 10.0], vec![0.9, 2.5]];
        let (scaled, stats) = normalize(&features, None).unwrap();
        for (orig, norm) in features.iter().zip(&scaled) {
            let back = stats.invert_row(norm);
            for (a, b) in orig.iter().zip(&back) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn supplied_stats_are_reused() {
        let train = vec![vec![0.0], vec![10.0]];
        let (_, stats) = normalize(&train, None).unwrap();
        let test = vec![vec![5.0]];
        let (scaled, stats2) = normalize(&test, Some(stats.clone())).unwrap();
        assert_eq!(scaled, vec![vec![0.5]]);
        assert_eq!(stats, stats2);
    }
}
