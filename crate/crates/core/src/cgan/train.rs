//! Adversarial training: per cycle, one discriminator step over a real
//! batch plus a generated batch, then one generator step on the same
//! generated batch with the discriminator frozen and gradients flowing
//! through it. [`Trainer`] exposes the loop one epoch at a time so callers
//! can stream progress; [`train_cgan`] drives it to completion.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::cgan::{
    build_discriminator, build_generator, normalize, CganModel, EpochLosses, NormalizationStats,
    TrainConfig,
};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{adam_step, bce_grad, bce_loss, AdamState, DenseNetwork, Gradients};
use crate::rng;
use crate::simulate::sample_noise;

/// Trains on raw features with no log transform.
pub fn train_cgan(data: &Dataset, config: &TrainConfig) -> Result<CganModel> {
    train_cgan_with(data, config, &vec![false; data.feature_count()])
}

/// Trains with selected features entering in ln space (traffic volumes),
/// so the generator models ln(AADT) and synthesis maps back with exp.
pub fn train_cgan_with(
    data: &Dataset,
    config: &TrainConfig,
    log_features: &[bool],
) -> Result<CganModel> {
    let mut trainer = Trainer::new(data, config, log_features)?;
    for _ in 0..config.epochs {
        trainer.run_epoch()?;
    }
    Ok(trainer.into_model())
}

/// Incremental CGAN training state.
pub struct Trainer {
    feature_names: Vec<String>,
    log_features: Vec<bool>,
    counts: Vec<u32>,
    counts_f: Vec<[f64; 1]>,
    normalized: Vec<Vec<f64>>,
    norm: NormalizationStats,
    rng: ChaCha12Rng,
    generator: DenseNetwork,
    discriminator: DenseNetwork,
    adam_g: AdamState,
    adam_d: AdamState,
    d_grads: Gradients,
    g_grads: Gradients,
    order: Vec<usize>,
    history: Vec<EpochLosses>,
    fs: usize,
    batch: usize,
}

impl Trainer {
    pub fn new(data: &Dataset, config: &TrainConfig, log_features: &[bool]) -> Result<Trainer> {
        config.validate()?;
        if data.is_empty() {
            return Err(Error::EmptyInput("cgan training data".into()));
        }
        if log_features.len() != data.feature_count() {
            return Err(Error::DimensionMismatch {
                location: "log feature flags".into(),
                expected: data.feature_count(),
                got: log_features.len(),
            });
        }
        let fs = data.feature_count();
        let mut transformed = Vec::with_capacity(data.len());
        for (i, row) in data.features.iter().enumerate() {
            let mut t = Vec::with_capacity(fs);
            for (j, (&x, &log)) in row.iter().zip(log_features).enumerate() {
                if log {
                    if x <= 0.0 {
                        return Err(Error::InvalidParameter(format!(
                            "row {i}, feature {}: log transform needs values > 0, got {x}",
                            data.feature_names[j]
                        )));
                    }
                    t.push(x.ln());
                } else {
                    t.push(x);
                }
            }
            transformed.push(t);
        }
        let (normalized, norm) = normalize(&transformed, None)?;

        let mut rng = rng::stream(config.seed, "cgan-train", 0);
        let generator = build_generator(fs, &mut rng)?;
        let discriminator = build_discriminator(fs, &mut rng)?;
        // Inverse-time learning-rate decay in the optimizer step index;
        // with batch_size = n one epoch is one step. First-moment decay
        // 0.5: at 0.9 the adversarial loop destabilizes and the
        // discriminator runs away from the generator.
        let mut adam_g = AdamState::new(generator.param_count(), config.lr_g, config.decay_g)?;
        let mut adam_d = AdamState::new(discriminator.param_count(), config.lr_d, config.decay_d)?;
        adam_g.beta1 = 0.5;
        adam_d.beta1 = 0.5;

        let n = data.len();
        Ok(Trainer {
            batch: config.batch_size.min(n),
            feature_names: data.feature_names.clone(),
            log_features: log_features.to_vec(),
            counts: data.counts.clone(),
            counts_f: data.counts.iter().map(|&c| [f64::from(c)]).collect(),
            normalized,
            norm,
            rng,
            d_grads: Gradients::zeros_like(&discriminator),
            g_grads: Gradients::zeros_like(&generator),
            generator,
            discriminator,
            adam_g,
            adam_d,
            order: (0..n).collect(),
            history: Vec::with_capacity(config.epochs),
            fs,
        })
    }

    pub fn epochs_completed(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> &[EpochLosses] {
        &self.history
    }

    /// One full pass over the shuffled dataset in chunks of `batch_size`;
    /// with `batch_size = n` that is a single full-batch cycle.
    pub fn run_epoch(&mut self) -> Result<EpochLosses> {
        let epoch = self.history.len();
        shuffle(&mut self.order, &mut self.rng);
        let order = std::mem::take(&mut self.order);
        let mut loss_d_sum = 0.0;
        let mut loss_g_sum = 0.0;
        let mut chunks = 0usize;
        let mut failure: Option<Error> = None;
        for indices in order.chunks(self.batch) {
            match self.run_cycle(indices, epoch) {
                Ok((loss_d, loss_g)) => {
                    loss_d_sum += loss_d;
                    loss_g_sum += loss_g;
                    chunks += 1;
                }
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        self.order = order;
        if let Some(e) = failure {
            return Err(e);
        }
        let losses = EpochLosses {
            loss_d: loss_d_sum / chunks as f64,
            loss_g: loss_g_sum / chunks as f64,
        };
        self.history.push(losses);
        Ok(losses)
    }

    fn run_cycle(&mut self, indices: &[usize], epoch: usize) -> Result<(f64, f64)> {
        let b = indices.len() as f64;

        // Discriminator step: real batch scored against 1, a generated
        // batch conditioned on the same counts against 0. Loss(D) averages
        // the half-sum of both terms.
        self.d_grads.scale(0.0);
        let mut loss_d = 0.0;
        let d_scale = 1.0 / (2.0 * b);
        for &i in indices {
            let cache = self
                .discriminator
                .forward_cached(&[&self.normalized[i], &self.counts_f[i]])?;
            let p = cache.output()[0];
            loss_d += 0.5 * bce_loss(p, 1.0);
            self.discriminator
                .backward_into(&cache, &[bce_grad(p, 1.0) * d_scale], &mut self.d_grads)?;
        }
        for &i in indices {
            let z = sample_noise(self.fs, &mut self.rng);
            let fake = self.generator.forward(&[&self.counts_f[i], &z])?;
            let cache = self
                .discriminator
                .forward_cached(&[&fake, &self.counts_f[i]])?;
            let p = cache.output()[0];
            loss_d += 0.5 * bce_loss(p, 0.0);
            self.discriminator
                .backward_into(&cache, &[bce_grad(p, 0.0) * d_scale], &mut self.d_grads)?;
        }
        loss_d /= b;
        if !loss_d.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch,
                what: format!("Loss(D) = {loss_d}"),
            });
        }
        adam_step(&mut self.discriminator, &self.d_grads, &mut self.adam_d)?;

        // Generator step: fresh noise, loss -log D(fake | y), gradients
        // flowing through the (frozen, just-updated) discriminator into
        // the generator.
        self.g_grads.scale(0.0);
        let mut loss_g = 0.0;
        let g_scale = 1.0 / b;
        for &i in indices {
            let z = sample_noise(self.fs, &mut self.rng);
            let g_cache = self.generator.forward_cached(&[&self.counts_f[i], &z])?;
            let d_cache = self
                .discriminator
                .forward_cached(&[g_cache.output(), &self.counts_f[i]])?;
            let p = d_cache.output()[0];
            loss_g += bce_loss(p, 1.0);
            let flow = self
                .discriminator
                .backward_inputs(&d_cache, &[bce_grad(p, 1.0) * g_scale])?;
            self.generator
                .backward_into(&g_cache, &flow[0], &mut self.g_grads)?;
        }
        loss_g /= b;
        if !loss_g.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch,
                what: format!("Loss(G) = {loss_g}"),
            });
        }
        adam_step(&mut self.generator, &self.g_grads, &mut self.adam_g)?;

        Ok((loss_d, loss_g))
    }

    /// Snapshot of the current state as a usable model.
    pub fn model(&self) -> CganModel {
        CganModel {
            generator: self.generator.clone(),
            discriminator: self.discriminator.clone(),
            norm: self.norm.clone(),
            feature_names: self.feature_names.clone(),
            log_features: self.log_features.clone(),
            empirical_counts: self.counts.clone(),
            history: self.history.clone(),
        }
    }

    pub fn into_model(self) -> CganModel {
        CganModel {
            generator: self.generator,
            discriminator: self.discriminator,
            norm: self.norm,
            feature_names: self.feature_names,
            log_features: self.log_features,
            empirical_counts: self.counts,
            history: self.history,
        }
    }
}

/// Seeded Fisher-Yates shuffle.
fn shuffle<R: Rng + ?Sized>(indices: &mut [usize], rng: &mut R) {
    let n = indices.len();
    for j in 0..n.saturating_sub(1) {
        let r = j + rng.random_range(0..n - j);
        indices.swap(j, r);
    }
}
