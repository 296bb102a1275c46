//! Performance measures for hotspot screening and prediction accuracy:
//! false identification (FI), Poisson mean difference (PMD), and the MAPE
//! family, plus the experiment orchestrators that compare SPFs fitted on
//! original data against SPFs fitted on augmented data.

mod experiment;
pub mod report;

use crate::error::{Error, Result};

pub use experiment::{
    replicate, run_realworld_experiment, run_simulation_experiment, ArmSummary, ExperimentCell,
    ExperimentOptions, ExperimentReport, FeatureDistributionTests, MetricSet, RealWorldReport,
    ReplicationOutcome, SpfSummary, METRIC_NAMES,
};

/// Site indices ordered by descending score, ties broken by ascending
/// index so rankings are deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HotspotRanking {
    order: Vec<usize>,
}

impl HotspotRanking {
    /// Ranks `scores` (one per site) descending.
    pub fn from_scores(scores: &[f64]) -> HotspotRanking {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| {
            scores[b]
                .partial_cmp(&scores[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        HotspotRanking { order }
    }

    pub fn site_count(&self) -> usize {
        self.order.len()
    }

    /// The top `k` site indices.
    pub fn top(&self, k: usize) -> &[usize] {
        &self.order[..k.min(self.order.len())]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

fn check_k(k: usize, sites: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if k > sites {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds the {sites} available sites"
        )));
    }
    Ok(())
}

/// False identification: the percentage of suggested top-k hotspots that
/// are not true top-k hotspots.
pub fn fi_test(suggested: &HotspotRanking, truth: &HotspotRanking, k: usize) -> Result<f64> {
    check_k(k, suggested.site_count().min(truth.site_count()))?;
    let true_top: std::collections::HashSet<usize> = truth.top(k).iter().copied().collect();
    let misses = suggested
        .top(k)
        .iter()
        .filter(|site| !true_top.contains(site))
        .count();
    Ok(100.0 * misses as f64 / k as f64)
}

/// Poisson mean difference: the relative shortfall of summed true means
/// between the true top-k set and the suggested top-k set.
pub fn pmd_test(
    true_means: &[f64],
    suggested: &HotspotRanking,
    truth: &HotspotRanking,
    k: usize,
) -> Result<f64> {
    check_k(k, suggested.site_count().min(truth.site_count()))?;
    if true_means.len() < suggested.site_count() {
        return Err(Error::DimensionMismatch {
            location: "true means".into(),
            expected: suggested.site_count(),
            got: true_means.len(),
        });
    }
    let sum = |sites: &[usize]| sites.iter().map(|&i| true_means[i]).sum::<f64>();
    let top_true = sum(truth.top(k));
    let top_suggested = sum(suggested.top(k));
    Ok(100.0 * (top_true - top_suggested) / top_true)
}

/// Arithmetic mean of a per-k metric over several hotspot list sizes.
pub fn multi_k_average<F>(metric: F, ks: &[usize]) -> Result<f64>
where
    F: Fn(usize) -> Result<f64>,
{
    if ks.is_empty() {
        return Err(Error::EmptyInput("multi_k_average needs at least one k".into()));
    }
    let mut sum = 0.0;
    for &k in ks {
        sum += metric(k)?;
    }
    Ok(sum / ks.len() as f64)
}

/// Hotspot list sizes averaged in every screening comparison.
pub const DEFAULT_KS: [usize; 4] = [5, 10, 15, 20];

/// Mean absolute percentage error. Pairs whose truth is not strictly
/// positive are excluded (MAPE is undefined there); erroring if nothing
/// remains.
pub fn mape(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            location: "mape inputs".into(),
            expected: truths.len(),
            got: predictions.len(),
        });
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    for (p, t) in predictions.iter().zip(truths) {
        if *t > 0.0 {
            sum += (p - t).abs() / t;
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::EmptyInput(
            "mape: no pairs with positive truth remain".into(),
        ));
    }
    Ok(100.0 * sum / used as f64)
}
