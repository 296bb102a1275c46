//! Synthetic crash data: uniform features feeding a gamma-heterogeneous
//! Poisson count model, plus the experiment suite layout (one CGAN training
//! set, N network-screening test sets, N prediction test sets).

pub mod distributions;

use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use distributions::{sample_gamma_heterogeneity, sample_poisson, sample_standard_normal};

/// Parameters of the crash-count generator
/// `lambda = exp(beta0 + beta . X) * exp(eps)`, `Y ~ Poisson(lambda)`,
/// with `exp(eps)` gamma distributed with mean 1 and variance `dispersion`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub beta0: f64,
    pub coefficients: Vec<f64>,
    pub dispersion: f64,
    pub sample_size: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            beta0: 0.5,
            coefficients: vec![0.5, -0.5, 1.0, -1.0],
            dispersion: 0.5,
            sample_size: 100,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn feature_count(&self) -> usize {
        self.coefficients.len()
    }

    fn validate(&self) -> Result<()> {
        if self.dispersion <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dispersion must be > 0, got {}",
                self.dispersion
            )));
        }
        if self.sample_size == 0 {
            return Err(Error::InvalidParameter("sample_size must be >= 1".into()));
        }
        if self.coefficients.is_empty() {
            return Err(Error::InvalidParameter("need at least one coefficient".into()));
        }
        Ok(())
    }
}

/// A simulated dataset together with the configuration that produced it.
/// The embedded [`Dataset`] always carries the true means.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDataset {
    pub data: Dataset,
    pub config: SimConfig,
}

/// The full simulated-experiment data layout: one training set for the
/// CGAN and paired test-set replications for screening and prediction.
#[derive(Debug, Clone)]
pub struct ExperimentSuite {
    pub cgan_train: SimDataset,
    pub ns_test: Vec<SimDataset>,
    pub prediction_test: Vec<SimDataset>,
}

/// Generates one dataset: `X ~ U[0,1]^FS` per row, counts from the
/// gamma-Poisson mixture. Deterministic given `config.seed`.
pub fn gen_dataset(config: &SimConfig) -> Result<SimDataset> {
    config.validate()?;
    let mut rng = rng::stream(config.seed, "sim-dataset", 0);
    gen_dataset_with(config, &mut rng)
}

fn gen_dataset_with<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<SimDataset> {
    config.validate()?;
    let fs = config.feature_count();
    let n = config.sample_size;
    let mut features = Vec::with_capacity(n);
    let mut counts = Vec::with_capacity(n);
    let mut means = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..fs).map(|_| rng.random::<f64>()).collect();
        let linear: f64 = config.beta0
            + config
                .coefficients
                .iter()
                .zip(&x)
                .map(|(b, v)| b * v)
                .sum::<f64>();
        let heterogeneity = sample_gamma_heterogeneity(config.dispersion, rng)?;
        let lambda = linear.exp() * heterogeneity;
        let y = sample_poisson(lambda, rng)?;
        features.push(x);
        counts.push(y);
        means.push(lambda);
    }
    let names = (1..=fs).map(|j| format!("x{j}")).collect();
    let mut data = Dataset::new(names, features, counts)?;
    data.true_means = Some(means);
    Ok(SimDataset {
        data,
        config: config.clone(),
    })
}

/// Generates the Fig-layout suite: one CGAN training set plus `n_ns`
/// network-screening and `n_pred` prediction replications, all of size
/// `config.sample_size` with per-replication seeds derived from
/// `config.seed`.
pub fn gen_experiment_suite(
    config: &SimConfig,
    n_ns: usize,
    n_pred: usize,
) -> Result<ExperimentSuite> {
    config.validate()?;
    if n_ns == 0 || n_pred == 0 {
        return Err(Error::InvalidParameter(
            "need at least one replication of each test kind".into(),
        ));
    }
    let master = config.seed;
    let make = |label: &str, index: u64| -> Result<SimDataset> {
        let mut rng = rng::stream(master, label, index);
        gen_dataset_with(config, &mut rng)
    };
    Ok(ExperimentSuite {
        cgan_train: make("cgan-train", 0)?,
        ns_test: (0..n_ns)
            .map(|i| make("ns-test", i as u64))
            .collect::<Result<_>>()?,
        prediction_test: (0..n_pred)
            .map(|i| make("pred-test", i as u64))
            .collect::<Result<_>>()?,
    })
}

/// Closed-form `E[Y]` of the generator: `exp(beta0) * prod_j E[exp(b_j U)]`
/// with `E[exp(b U)] = (exp(b) - 1)/b` for `U ~ U[0,1]`, times the unit
/// mean of the heterogeneity.
pub fn expected_count_mean(config: &SimConfig) -> f64 {
    let mgf = |b: f64| {
        if b.abs() < 1e-12 {
            1.0
        } else {
            (b.exp() - 1.0) / b
        }
    };
    config.beta0.exp() * config.coefficients.iter().map(|&b| mgf(b)).product::<f64>()
}

/// Demo generator for a stop-controlled-intersection style dataset with two
/// traffic-volume features. Volumes are log-uniform; counts follow an NB
/// model of the usual `exp(b0 + b1 ln(major) + b2 ln(minor))` form. Used by
/// the real-data pipeline tests and the bundled example data.
pub fn gen_intersection_dataset(n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = rng::stream(seed, "intersections", 0);
    let mut features = Vec::with_capacity(n);
    let mut counts = Vec::with_capacity(n);
    let (b0, b_major, b_minor, alpha) = (-5.2, 0.45, 0.25, 0.6);
    for _ in 0..n {
        // ln(AADT) roughly uniform across realistic volume ranges.
        let ln_major = 7.5 + 2.3 * rng.random::<f64>();
        let ln_minor = 5.5 + 2.3 * rng.random::<f64>();
        let aadt_major = ln_major.exp().round();
        let aadt_minor = ln_minor.exp().round();
        let mu = (b0 + b_major * aadt_major.ln() + b_minor * aadt_minor.ln()).exp();
        let lambda = mu * sample_gamma_heterogeneity(alpha, &mut rng)?;
        let y = sample_poisson(lambda, &mut rng)?;
        features.push(vec![aadt_major, aadt_minor]);
        counts.push(y);
    }
    Dataset::new(vec!["aadt_major".into(), "aadt_minor".into()], features, counts)
}

/// Noise vector `z ~ N(0, I_fs)` for the generator input.
pub fn sample_noise<R: Rng + ?Sized>(fs: usize, rng: &mut R) -> Vec<f64> {
    (0..fs).map(|_| sample_standard_normal(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_config_gives_unit_means() {
        let config = SimConfig {
            beta0: 0.0,
            coefficients: vec![0.0, 0.0],
            dispersion: 1e-6,
            sample_size: 2_000,
            seed: 5,
        };
        let sim = gen_dataset(&config).unwrap();
        let means = sim.data.true_means.as_ref().unwrap();
        let avg = means.iter().sum::<f64>() / means.len() as f64;
        assert!((avg - 1.0).abs() < 0.01, "avg lambda = {avg}");
        assert!(means.iter().all(|&m| (m - 1.0).abs() < 0.2));
    }

    #[test]
    fn paper_config_count_mean_matches_closed_form() {
        let config = SimConfig {
            sample_size: 100_000,
            seed: 9,
            ..SimConfig::default()
        };
        let expected = expected_count_mean(&config);
        assert!((expected - 1.828).abs() < 0.01, "closed form = {expected}");
        let sim = gen_dataset(&config).unwrap();
        let mean = sim.data.counts.iter().map(|&c| f64::from(c)).sum::<f64>()
            / config.sample_size as f64;
        assert!((mean - expected).abs() < 0.05, "sample mean = {mean}");
    }

    #[test]
    fn counts_are_overdispersed_at_high_dispersion() {
        let config = SimConfig {
            dispersion: 1.5,
            sample_size: 50_000,
            seed: 10,
            ..SimConfig::default()
        };
        let sim = gen_dataset(&config).unwrap();
        let ys: Vec<f64> = sim.data.counts.iter().map(|&c| f64::from(c)).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let var = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (ys.len() as f64 - 1.0);
        assert!(var / mean > 1.5, "var/mean = {}", var / mean);
    }

    #[test]
    fn low_mean_regime_dominated_by_zeros_and_ones() {
        let config = SimConfig {
            sample_size: 20_000,
            seed: 11,
            ..SimConfig::default()
        };
        let sim = gen_dataset(&config).unwrap();
        let small = sim.data.counts.iter().filter(|&&c| c <= 1).count();
        assert!(small as f64 / 20_000.0 > 0.5);
    }

    #[test]
    fn suites_with_same_seed_are_identical() {
        let config = SimConfig {
            sample_size: 20,
            seed: 12,
            ..SimConfig::default()
        };
        let a = gen_experiment_suite(&config, 3, 2).unwrap();
        let b = gen_experiment_suite(&config, 3, 2).unwrap();
        assert_eq!(a.cgan_train, b.cgan_train);
        assert_eq!(a.ns_test, b.ns_test);
        assert_eq!(a.prediction_test, b.prediction_test);
        // Replications differ from one another.
        assert_ne!(a.ns_test[0], a.ns_test[1]);
        assert_ne!(a.ns_test[0].data, a.prediction_test[0].data);
    }

    #[test]
    fn minimal_suite() {
        let config = SimConfig {
            sample_size: 10,
            seed: 13,
            ..SimConfig::default()
        };
        let suite = gen_experiment_suite(&config, 1, 1).unwrap();
        assert_eq!(suite.ns_test.len(), 1);
        assert_eq!(suite.ns_test[0].data.len(), 10);
    }

    #[test]
    fn dataset_invariants_hold_over_random_configs() {
        for i in 0..30 {
            let mut cfg_rng = crate::rng::stream(77, "sim-prop", i);
            let fs = 1 + (cfg_rng.random::<f64>() * 5.0) as usize;
            let config = SimConfig {
                beta0: 2.0 * cfg_rng.random::<f64>() - 1.0,
                coefficients: (0..fs).map(|_| 2.0 * cfg_rng.random::<f64>() - 1.0).collect(),
                dispersion: 0.1 + 2.9 * cfg_rng.random::<f64>(),
                sample_size: 1 + (cfg_rng.random::<f64>() * 200.0) as usize,
                seed: 1000 + i,
            };
            let sim = gen_dataset(&config).unwrap();
            let means = sim.data.true_means.as_ref().unwrap();
            assert!(means.iter().all(|&m| m > 0.0));
            assert!(sim
                .data
                .features
                .iter()
                .flatten()
                .all(|&x| (0.0..=1.0).contains(&x)));
            assert_eq!(sim.data.len(), config.sample_size);
        }
    }

    #[test]
    fn bundled_demo_dataset_matches_its_generator() {
        // data/intersections_demo.csv is committed for CLI walkthroughs
        // and the real-data pipeline tests; it must stay in sync with the
        // generator that produced it.
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../data/intersections_demo.csv");
        let bundled = std::fs::read_to_string(path).unwrap();
        let generated = gen_intersection_dataset(200, 7311).unwrap();
        assert_eq!(bundled, generated.to_csv());
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad_dispersion = SimConfig {
            dispersion: 0.0,
            ..SimConfig::default()
        };
        assert!(gen_dataset(&bad_dispersion).is_err());
        let bad_size = SimConfig {
            sample_size: 0,
            ..SimConfig::default()
        };
        assert!(gen_dataset(&bad_size).is_err());
    }
}
