//! Experiment orchestration: the Base-vs-Augmented comparison over
//! simulated replications, and the real-data pipeline with a train/test
//! split, feature-distribution tests, and prediction MAPE.

use crate::cgan::{synthesize, train_cgan_with, CganModel, TrainConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::evaluate::{fi_test, mape, multi_k_average, pmd_test, HotspotRanking, DEFAULT_KS};
use crate::rng;
use crate::simulate::{ExperimentSuite, SimDataset};
use crate::spf::{
    coefficient_significance, eb_estimate_with, fit_spf, CoefficientTest, EbWeighting, Formula,
    SpfModel,
};
use crate::stats::{ks_test, levene_test, paired_t_test, welch_t_test, TestResult};

/// Metric order used in every report row.
pub const METRIC_NAMES: [&str; 5] = ["fi", "pmd", "mape_eb", "mape_crash", "mape_dispersion"];

/// The five per-replication performance measures, all percentages where
/// smaller is better.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricSet {
    pub fi: f64,
    pub pmd: f64,
    pub mape_eb: f64,
    pub mape_crash: f64,
    pub mape_dispersion: f64,
}

impl MetricSet {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.fi,
            self.pmd,
            self.mape_eb,
            self.mape_crash,
            self.mape_dispersion,
        ]
    }

    pub fn from_array(values: [f64; 5]) -> MetricSet {
        MetricSet {
            fi: values[0],
            pmd: values[1],
            mape_eb: values[2],
            mape_crash: values[3],
            mape_dispersion: values[4],
        }
    }

    pub fn mean_of(sets: &[MetricSet]) -> MetricSet {
        let mut acc = [0.0; 5];
        for s in sets {
            for (a, v) in acc.iter_mut().zip(s.as_array()) {
                *a += v;
            }
        }
        let n = sets.len().max(1) as f64;
        MetricSet::from_array(acc.map(|a| a / n))
    }
}

/// One arm (Base or Augmented) of one experiment cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary {
    /// `(replication index, metrics)`, ascending by index.
    pub per_replication: Vec<(usize, MetricSet)>,
    pub mean: MetricSet,
}

/// Results for one (dispersion, synthetic size) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCell {
    pub dispersion: f64,
    pub synthetic_size: usize,
    pub base: ArmSummary,
    pub augmented: ArmSummary,
    /// `(mean_base - mean_aug) / mean_base * 100` per metric.
    pub improvement: MetricSet,
    /// Paired t-test p-values Base vs Augmented per metric.
    pub p_values: MetricSet,
    pub failed_replications: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOptions {
    pub synthetic_sizes: Vec<usize>,
    pub ks: Vec<usize>,
    pub eb_weighting: EbWeighting,
    /// Master seed for the per-replication synthesis streams.
    pub seed: u64,
    /// Replication worker threads; 1 runs sequentially.
    pub workers: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            synthetic_sizes: vec![200, 500, 1000],
            ks: DEFAULT_KS.to_vec(),
            eb_weighting: EbWeighting::default(),
            seed: 0,
            workers: 1,
        }
    }
}

/// Full simulated-experiment report for one dispersion setting.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub dispersion: f64,
    pub sample_size: usize,
    pub replications: usize,
    pub cells: Vec<ExperimentCell>,
    pub eb_weighting: String,
    /// Closed-form E[Y] under the generator config.
    pub expected_count_mean: f64,
    /// exp(beta0), the intercept-only reference mean quoted alongside.
    pub intercept_count_mean: f64,
    /// What EB and crash MAPEs are measured against.
    pub mape_target: String,
}

/// Base metrics plus augmented metrics per synthetic size for one
/// replication; the unit of work for resumable runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub base: MetricSet,
    /// Aligned with `options.synthetic_sizes`.
    pub augmented: Vec<MetricSet>,
}

/// Compares Base SPFs (fitted per replication) against Augmented SPFs
/// (fitted on the replication plus synthesized rows) across every
/// synthetic size, aggregating FI/PMD/MAPE metrics and paired t-tests.
/// Failed replications (for example IRLS non-convergence on a pathological
/// draw) are dropped and counted, never imputed.
pub fn run_simulation_experiment(
    suite: &ExperimentSuite,
    cgan: &CganModel,
    options: &ExperimentOptions,
) -> Result<ExperimentReport> {
    if cgan.feature_count() != suite.cgan_train.config.feature_count() {
        return Err(Error::DimensionMismatch {
            location: "cgan feature space".into(),
            expected: suite.cgan_train.config.feature_count(),
            got: cgan.feature_count(),
        });
    }
    let n_reps = suite.ns_test.len().min(suite.prediction_test.len());
    if n_reps == 0 {
        return Err(Error::EmptyInput("experiment suite has no replications".into()));
    }
    let run_one = |r: usize| -> (usize, Result<ReplicationOutcome>) {
        (
            r,
            replicate(
                r,
                &suite.ns_test[r],
                &suite.prediction_test[r],
                cgan,
                options,
            ),
        )
    };
    let mut outcomes: Vec<(usize, Result<ReplicationOutcome>)> = if options.workers <= 1 {
        (0..n_reps).map(run_one).collect()
    } else {
        let workers = options.workers.min(n_reps);
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let run_one = &run_one;
                    scope.spawn(move || {
                        (w..n_reps).step_by(workers).map(run_one).collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("replication worker panicked"))
                .collect()
        })
    };
    outcomes.sort_by_key(|(r, _)| *r);

    let mut complete: Vec<(usize, ReplicationOutcome)> = Vec::new();
    let mut failed = 0usize;
    for (r, outcome) in outcomes {
        match outcome {
            Ok(o) => complete.push((r, o)),
            Err(_) => failed += 1,
        }
    }
    if complete.is_empty() {
        return Err(Error::EmptyInput("every replication failed".into()));
    }

    let config = &suite.cgan_train.config;
    let mut cells = Vec::with_capacity(options.synthetic_sizes.len());
    for (size_idx, &size) in options.synthetic_sizes.iter().enumerate() {
        let base_rows: Vec<(usize, MetricSet)> =
            complete.iter().map(|(r, o)| (*r, o.base)).collect();
        let aug_rows: Vec<(usize, MetricSet)> = complete
            .iter()
            .map(|(r, o)| (*r, o.augmented[size_idx]))
            .collect();
        let base_mean = MetricSet::mean_of(&base_rows.iter().map(|(_, m)| *m).collect::<Vec<_>>());
        let aug_mean = MetricSet::mean_of(&aug_rows.iter().map(|(_, m)| *m).collect::<Vec<_>>());

        let mut improvement = [0.0; 5];
        let mut p_values = [f64::NAN; 5];
        for (m, imp) in improvement.iter_mut().enumerate() {
            let b = base_mean.as_array()[m];
            let a = aug_mean.as_array()[m];
            *imp = if b == 0.0 {
                if a == 0.0 {
                    0.0
                } else {
                    f64::NAN
                }
            } else {
                (b - a) / b * 100.0
            };
            let base_vals: Vec<f64> = base_rows.iter().map(|(_, s)| s.as_array()[m]).collect();
            let aug_vals: Vec<f64> = aug_rows.iter().map(|(_, s)| s.as_array()[m]).collect();
            if base_vals.len() >= 2 {
                if let Ok(test) = paired_t_test(&base_vals, &aug_vals) {
                    p_values[m] = test.p_value;
                }
            }
        }

        cells.push(ExperimentCell {
            dispersion: config.dispersion,
            synthetic_size: size,
            base: ArmSummary {
                per_replication: base_rows,
                mean: base_mean,
            },
            augmented: ArmSummary {
                per_replication: aug_rows,
                mean: aug_mean,
            },
            improvement: MetricSet::from_array(improvement),
            p_values: MetricSet::from_array(p_values),
            failed_replications: failed,
        });
    }

    Ok(ExperimentReport {
        dispersion: config.dispersion,
        sample_size: config.sample_size,
        replications: n_reps,
        cells,
        eb_weighting: options.eb_weighting.name().to_string(),
        expected_count_mean: crate::simulate::expected_count_mean(config),
        intercept_count_mean: config.beta0.exp(),
        mape_target: "true-lambda".to_string(),
    })
}

/// Fits the Base and per-size Augmented SPFs for replication `r` and
/// computes its metrics. Synthesis seeds derive from
/// `(options.seed, size, r)` so outcomes are independent of execution
/// order.
pub fn replicate(
    r: usize,
    ns: &SimDataset,
    pred: &SimDataset,
    cgan: &CganModel,
    options: &ExperimentOptions,
) -> Result<ReplicationOutcome> {
    let formula = Formula::all_features(&ns.data);
    let base_model = fit_spf(&ns.data, &formula)?;
    let base = arm_metrics(&base_model, ns, pred, options)?;
    let mut augmented = Vec::with_capacity(options.synthetic_sizes.len());
    for &size in &options.synthetic_sizes {
        let synth_seed = rng::derive_seed(options.seed, &format!("synth-{size}"), r as u64);
        let synth = synthesize(cgan, size, synth_seed)?;
        let combined = ns.data.concat(&synth)?;
        let aug_model = fit_spf(&combined, &formula)?;
        augmented.push(arm_metrics(&aug_model, ns, pred, options)?);
    }
    Ok(ReplicationOutcome { base, augmented })
}

/// The five measures for one fitted SPF: EB screening against the true
/// ranking on the screening set, EB and dispersion accuracy, and crash
/// frequency MAPE on the paired prediction set.
fn arm_metrics(
    model: &SpfModel,
    ns: &SimDataset,
    pred: &SimDataset,
    options: &ExperimentOptions,
) -> Result<MetricSet> {
    let lambdas = ns
        .data
        .true_means
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("screening set lacks true means".into()))?;
    let mu = model.predict_dataset(&ns.data)?;
    let eb: Vec<f64> = mu
        .iter()
        .zip(&ns.data.counts)
        .map(|(&m, &y)| {
            eb_estimate_with(m, y, model.dispersion, options.eb_weighting).map(|e| e.eb)
        })
        .collect::<Result<_>>()?;
    let suggested = HotspotRanking::from_scores(&eb);
    let truth = HotspotRanking::from_scores(lambdas);
    let fi = multi_k_average(|k| fi_test(&suggested, &truth, k), &options.ks)?;
    let pmd = multi_k_average(|k| pmd_test(lambdas, &suggested, &truth, k), &options.ks)?;
    let mape_eb = mape(&eb, lambdas)?;
    let true_alpha = ns.config.dispersion;
    let mape_dispersion = (model.dispersion - true_alpha).abs() / true_alpha * 100.0;
    let pred_lambdas = pred
        .data
        .true_means
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("prediction set lacks true means".into()))?;
    let pred_mu = model.predict_dataset(&pred.data)?;
    let mape_crash = mape(&pred_mu, pred_lambdas)?;
    Ok(MetricSet {
        fi,
        pmd,
        mape_eb,
        mape_crash,
        mape_dispersion,
    })
}

/// Fitted model plus its Wald coefficient table.
#[derive(Debug, Clone, PartialEq)]
pub struct SpfSummary {
    pub model: SpfModel,
    pub coefficients: Vec<CoefficientTest>,
}

/// Synthetic-vs-real distribution tests for one feature. `None` entries
/// mean the test was degenerate on these samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDistributionTests {
    pub feature: String,
    pub t: Option<TestResult>,
    pub levene: Option<TestResult>,
    pub ks: Option<TestResult>,
}

/// Output of the real-data pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct RealWorldReport {
    pub train_rows: usize,
    pub test_rows: usize,
    pub synthetic_size: usize,
    pub base: SpfSummary,
    pub augmented: SpfSummary,
    pub feature_tests: Vec<FeatureDistributionTests>,
    /// Crash-frequency MAPE on the test half, zero-count sites excluded.
    pub mape_base: f64,
    pub mape_augmented: f64,
    pub eb_weighting: String,
}

/// Real-data pipeline: 50/50 split, CGAN trained on the train half,
/// Base and Augmented SPFs, per-feature distribution test battery, and
/// test-half prediction MAPE for both SPFs.
pub fn run_realworld_experiment(
    data: &Dataset,
    split_seed: u64,
    synthetic_size: usize,
    train_config: &TrainConfig,
    formula: &Formula,
    eb_weighting: EbWeighting,
) -> Result<RealWorldReport> {
    if data.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 rows to split, got {}",
            data.len()
        )));
    }
    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut rng = rng::stream(split_seed, "realworld-split", 0);
    // Fisher-Yates, then an even 1:1 split.
    for i in (1..indices.len()).rev() {
        let j = rand::Rng::random_range(&mut rng, 0..=i);
        indices.swap(i, j);
    }
    let half = data.len() / 2;
    let train = data.select(&indices[..half]);
    let test = data.select(&indices[half..]);

    // CGAN log flags follow the formula's log terms, matched by name.
    let log_flags: Vec<bool> = data
        .feature_names
        .iter()
        .map(|name| {
            formula
                .features
                .iter()
                .position(|f| f == name)
                .is_some_and(|i| formula.log_transform[i])
        })
        .collect();
    let cgan = train_cgan_with(&train, train_config, &log_flags)?;
    let synth_seed = rng::derive_seed(split_seed, "realworld-synth", 0);
    let synth = synthesize(&cgan, synthetic_size, synth_seed)?;

    let base_model = fit_spf(&train, formula)?;
    let augmented_model = fit_spf(&train.concat(&synth)?, formula)?;

    let mut feature_tests = Vec::with_capacity(data.feature_count());
    for j in 0..data.feature_count() {
        let real_col = train.column(j);
        let synth_col = synth.column(j);
        feature_tests.push(FeatureDistributionTests {
            feature: data.feature_names[j].clone(),
            t: welch_t_test(&synth_col, &real_col).ok(),
            levene: levene_test(&synth_col, &real_col).ok(),
            ks: ks_test(&synth_col, &real_col).ok(),
        });
    }

    let observed: Vec<f64> = test.counts.iter().map(|&c| f64::from(c)).collect();
    let mape_base = mape(&base_model.predict_dataset(&test)?, &observed)?;
    let mape_augmented = mape(&augmented_model.predict_dataset(&test)?, &observed)?;

    Ok(RealWorldReport {
        train_rows: train.len(),
        test_rows: test.len(),
        synthetic_size,
        base: SpfSummary {
            coefficients: coefficient_significance(&base_model),
            model: base_model,
        },
        augmented: SpfSummary {
            coefficients: coefficient_significance(&augmented_model),
            model: augmented_model,
        },
        feature_tests,
        mape_base,
        mape_augmented,
        eb_weighting: eb_weighting.name().to_string(),
    })
}
