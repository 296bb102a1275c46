//! Conditional GAN for crash data. The generator maps (crash count, noise)
//! to a feature vector; the discriminator scores (feature vector, crash
//! count) pairs. Both condition on the raw count; only features are
//! min-max normalized.

pub mod normalize;
mod synth;
mod train;

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::serialize::{read_network, LineReader};
use crate::nn::{network_to_string, Activation, DenseLayer, DenseNetwork};

pub use normalize::{normalize, NormalizationStats};
pub use synth::synthesize;
pub use train::{train_cgan, train_cgan_with, Trainer};

/// Training hyperparameters. Defaults follow the reference configuration:
/// Adam, 5000 epochs, batch 100, learning rate 0.001 for both networks,
/// inverse-time decay 0.001 on the generator and none on the discriminator.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_g: f64,
    pub lr_d: f64,
    pub decay_g: f64,
    pub decay_d: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5000,
            batch_size: 100,
            lr_g: 0.001,
            lr_d: 0.001,
            decay_g: 0.001,
            decay_d: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch_size must be >= 1".into()));
        }
        if self.lr_g <= 0.0 || self.lr_d <= 0.0 {
            return Err(Error::InvalidParameter("learning rates must be > 0".into()));
        }
        if self.decay_g < 0.0 || self.decay_d < 0.0 {
            return Err(Error::InvalidParameter("decays must be >= 0".into()));
        }
        Ok(())
    }
}

/// Discriminator and generator loss recorded once per epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLosses {
    pub loss_d: f64,
    pub loss_g: f64,
}

/// A trained conditional GAN plus everything needed to synthesize rows in
/// the original feature space: normalization statistics, per-feature log
/// flags, and the training count multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct CganModel {
    pub generator: DenseNetwork,
    pub discriminator: DenseNetwork,
    pub norm: NormalizationStats,
    pub feature_names: Vec<String>,
    /// Features trained in ln space (traffic volumes); synthesis maps them
    /// back with exp.
    pub log_features: Vec<bool>,
    /// Multiset of training crash counts; synthesis bootstraps from it.
    pub empirical_counts: Vec<u32>,
    /// Per-epoch (Loss(D), Loss(G)); not persisted.
    pub history: Vec<EpochLosses>,
}

impl CganModel {
    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    /// Discriminator probability that `(features, count)` is a real pair.
    /// Features are raw; the model applies its own log/normalize pipeline.
    pub fn discriminate(&self, features: &[f64], count: u32) -> Result<f64> {
        let transformed = self.transform_row(features)?;
        let out = self
            .discriminator
            .forward(&[&transformed, &[f64::from(count)]])?;
        Ok(out[0])
    }

    /// Applies the log flags and normalization to a raw feature row.
    pub(crate) fn transform_row(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.feature_count() {
            return Err(Error::DimensionMismatch {
                location: "cgan features".into(),
                expected: self.feature_count(),
                got: features.len(),
            });
        }
        let mut row = Vec::with_capacity(features.len());
        for (j, (&x, &log)) in features.iter().zip(&self.log_features).enumerate() {
            let v = if log {
                if x <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "feature {} must be > 0 for log transform, got {x}",
                        self.feature_names[j]
                    )));
                }
                x.ln()
            } else {
                x
            };
            row.push(self.norm.apply(j, v));
        }
        Ok(row)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "cganmodel v1");
        let _ = writeln!(out, "features {}", self.feature_names.len());
        for (name, &log) in self.feature_names.iter().zip(&self.log_features) {
            let _ = writeln!(out, "feature {} {name}", u8::from(log));
        }
        let _ = writeln!(out, "norm");
        let join = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "{}", join(&self.norm.mins));
        let _ = writeln!(out, "{}", join(&self.norm.maxs));
        let _ = writeln!(out, "counts {}", self.empirical_counts.len());
        let counts = self
            .empirical_counts
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, "{counts}");
        let _ = writeln!(out, "generator");
        out.push_str(&network_to_string(&self.generator));
        let _ = writeln!(out, "discriminator");
        out.push_str(&network_to_string(&self.discriminator));
        out
    }

    pub fn from_text(text: &str) -> Result<CganModel> {
        let mut reader = LineReader::new(text);
        reader.expect_line("cganmodel v1")?;
        let fs = reader.expect_counted("features")?;
        let mut feature_names = Vec::with_capacity(fs);
        let mut log_features = Vec::with_capacity(fs);
        for _ in 0..fs {
            let (lineno, line) = reader.next_line()?;
            let mut parts = line.splitn(3, ' ');
            if parts.next() != Some("feature") {
                return Err(Error::Parse {
                    line: lineno,
                    message: "expected `feature <log> <name>`".into(),
                });
            }
            let log: u8 = parts.next().and_then(|s| s.parse().ok()).ok_or(Error::Parse {
                line: lineno,
                message: "bad log flag".into(),
            })?;
            let name = parts.next().ok_or(Error::Parse {
                line: lineno,
                message: "missing feature name".into(),
            })?;
            feature_names.push(name.trim().to_string());
            log_features.push(log == 1);
        }
        reader.expect_line("norm")?;
        let mut mins = Vec::with_capacity(fs);
        reader.read_values(fs, &mut mins)?;
        let mut maxs = Vec::with_capacity(fs);
        reader.read_values(fs, &mut maxs)?;
        let n_counts = reader.expect_counted("counts")?;
        if n_counts == 0 {
            return Err(Error::EmptyInput("model has no empirical counts".into()));
        }
        let (lineno, line) = reader.next_line()?;
        let empirical_counts: Vec<u32> = line
            .split_whitespace()
            .map(|t| {
                t.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("not a count: {t:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if empirical_counts.len() != n_counts {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {n_counts} counts, found {}", empirical_counts.len()),
            });
        }
        reader.expect_line("generator")?;
        let generator = read_network(&mut reader)?;
        reader.expect_line("discriminator")?;
        let discriminator = read_network(&mut reader)?;
        Ok(CganModel {
            generator,
            discriminator,
            norm: NormalizationStats { mins, maxs },
            feature_names,
            log_features,
            empirical_counts,
            history: Vec::new(),
        })
    }
}

/// Generator topology: count and noise branches into Dense(100, ELU) each,
/// concat(200), three Dense(50, ELU), then Dense(FS, ReLU).
pub fn build_generator<R: Rng + ?Sized>(fs: usize, rng: &mut R) -> Result<DenseNetwork> {
    if fs < 1 {
        return Err(Error::InvalidParameter("feature size must be >= 1".into()));
    }
    DenseNetwork::branched(
        vec![
            DenseLayer::glorot(1, 100, Activation::Elu, rng)?,
            DenseLayer::glorot(fs, 100, Activation::Elu, rng)?,
        ],
        vec![
            DenseLayer::glorot(200, 50, Activation::Elu, rng)?,
            DenseLayer::glorot(50, 50, Activation::Elu, rng)?,
            DenseLayer::glorot(50, 50, Activation::Elu, rng)?,
            DenseLayer::glorot(50, fs, Activation::Relu, rng)?,
        ],
    )
}

/// Discriminator topology: feature and count branches into Dense(100, ELU)
/// each, concat(200), two Dense(50, ELU), then Dense(1, Sigmoid).
pub fn build_discriminator<R: Rng + ?Sized>(fs: usize, rng: &mut R) -> Result<DenseNetwork> {
    if fs < 1 {
        return Err(Error::InvalidParameter("feature size must be >= 1".into()));
    }
    DenseNetwork::branched(
        vec![
            DenseLayer::glorot(fs, 100, Activation::Elu, rng)?,
            DenseLayer::glorot(1, 100, Activation::Elu, rng)?,
        ],
        vec![
            DenseLayer::glorot(200, 50, Activation::Elu, rng)?,
            DenseLayer::glorot(50, 50, Activation::Elu, rng)?,
            DenseLayer::glorot(50, 1, Activation::Sigmoid, rng)?,
        ],
    )
}
