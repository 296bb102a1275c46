//! Crash-frequency data augmentation with a conditional GAN.
//!
//! The crate covers the full pipeline: simulating gamma-Poisson crash
//! datasets, training a conditional GAN on (feature, count) pairs,
//! synthesizing additional rows, fitting negative-binomial safety
//! performance functions by two-step estimation, empirical Bayes hotspot
//! screening, and the evaluation harness that compares SPFs fitted on
//! original data against SPFs fitted on augmented data.
//!
//! Modules:
//! - [`nn`]: dense network engine (forward/backward, BCE, Adam).
//! - [`cgan`]: conditional GAN construction, training, synthesis.
//! - [`simulate`]: gamma-Poisson crash data generator and experiment suites.
//! - [`spf`]: Poisson IRLS + auxiliary-OLS dispersion, prediction, EB.
//! - [`stats`]: two-sample t / Levene / KS tests and special functions.
//! - [`evaluate`]: FI/PMD/MAPE metrics and the experiment orchestrators.

pub mod cgan;
pub mod data;
pub mod error;
pub mod evaluate;
pub mod nn;
pub mod rng;
pub mod simulate;
pub mod spf;
pub mod stats;

pub use data::Dataset;
pub use error::{Error, Result};
