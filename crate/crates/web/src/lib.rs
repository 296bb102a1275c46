//! Browser demo bindings. Three interactive operations, each returning
//! JSON for the page to plot:
//!
//! - [`simulate_counts`]: draw a gamma-Poisson crash dataset and histogram it
//! - [`DemoTrainer`]: step CGAN training and stream the loss curves
//! - [`DemoTrainer::compare`]: synthesize rows, test them against held-out
//!   real data, and fit Base vs Augmented SPFs

use std::fmt::Write as _;

use wasm_bindgen::prelude::*;

use crashgan_core::cgan::{synthesize, TrainConfig, Trainer};
use crashgan_core::evaluate::{fi_test, multi_k_average, HotspotRanking};
use crashgan_core::simulate::{expected_count_mean, gen_dataset, SimConfig};
use crashgan_core::spf::{eb_estimate, fit_spf, Formula};
use crashgan_core::stats::ks_test;
use crashgan_core::Dataset;

fn err_to_js(e: crashgan_core::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn json_f64_array(values: &[f64]) -> String {
    let mut out = String::from("[");
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if v.is_finite() {
            let _ = write!(out, "{v}");
        } else {
            out.push_str("null");
        }
    }
    out.push(']');
    out
}

fn demo_config(dispersion: f64, size: usize, seed: u64) -> SimConfig {
    SimConfig {
        dispersion,
        sample_size: size,
        seed,
        ..SimConfig::default()
    }
}

/// Simulated crash counts at the chosen intercept and dispersion:
/// count histogram, moments, and the closed-form expected mean.
#[wasm_bindgen]
pub fn simulate_counts(beta0: f64, dispersion: f64, size: usize, seed: u64) -> Result<String, JsValue> {
    let config = SimConfig {
        beta0,
        dispersion,
        sample_size: size.clamp(1, 100_000),
        seed,
        ..SimConfig::default()
    };
    let sim = gen_dataset(&config).map_err(err_to_js)?;
    let counts = &sim.data.counts;
    let max = counts.iter().copied().max().unwrap_or(0) as usize;
    let mut histogram = vec![0usize; max + 1];
    for &c in counts {
        histogram[c as usize] += 1;
    }
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| f64::from(c)).sum::<f64>() / n;
    let variance = counts
        .iter()
        .map(|&c| (f64::from(c) - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    let mut out = String::from("{");
    let _ = write!(out, "\"histogram\":[");
    for (i, h) in histogram.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{h}");
    }
    let _ = write!(
        out,
        "],\"mean\":{mean},\"variance\":{variance},\"var_mean_ratio\":{},\"expected_mean\":{},\"intercept_mean\":{}",
        variance / mean,
        expected_count_mean(&config),
        beta0.exp()
    );
    out.push('}');
    Ok(out)
}

/// Interactive CGAN training session on a simulated dataset.
#[wasm_bindgen]
pub struct DemoTrainer {
    trainer: Trainer,
    train_data: Dataset,
    held_out: Dataset,
    dispersion: f64,
    seed: u64,
}

#[wasm_bindgen]
impl DemoTrainer {
    /// Training set of `size` rows at the given dispersion, plus a
    /// held-out draw of the same process for the comparison panel.
    #[wasm_bindgen(constructor)]
    pub fn new(dispersion: f64, size: usize, seed: u64) -> Result<DemoTrainer, JsValue> {
        let size = size.clamp(10, 2000);
        let config = demo_config(dispersion, size, seed);
        let train = gen_dataset(&config).map_err(err_to_js)?;
        let held_out = gen_dataset(&demo_config(dispersion, size, seed ^ 0x9e37_79b9))
            .map_err(err_to_js)?;
        let trainer = Trainer::new(
            &train.data,
            &TrainConfig {
                seed,
                ..TrainConfig::default()
            },
            &vec![false; train.data.feature_count()],
        )
        .map_err(err_to_js)?;
        Ok(DemoTrainer {
            trainer,
            train_data: train.data,
            held_out: held_out.data,
            dispersion,
            seed,
        })
    }

    /// Runs `epochs` more training epochs; returns the appended loss pairs
    /// as `{"epochs": N, "loss_d": [...], "loss_g": [...]}`.
    pub fn step(&mut self, epochs: usize) -> Result<String, JsValue> {
        let mut loss_d = Vec::with_capacity(epochs);
        let mut loss_g = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            let losses = self.trainer.run_epoch().map_err(err_to_js)?;
            loss_d.push(losses.loss_d);
            loss_g.push(losses.loss_g);
        }
        Ok(format!(
            "{{\"epochs\":{},\"loss_d\":{},\"loss_g\":{}}}",
            self.trainer.epochs_completed(),
            json_f64_array(&loss_d),
            json_f64_array(&loss_g)
        ))
    }

    pub fn epochs_completed(&self) -> usize {
        self.trainer.epochs_completed()
    }

    /// Synthesizes `n_synthetic` rows from the current generator, compares
    /// per-feature distributions against held-out real data (KS), and fits
    /// Base vs Augmented SPFs on the held-out draw.
    pub fn compare(&self, n_synthetic: usize) -> Result<String, JsValue> {
        let n_synthetic = n_synthetic.clamp(1, 10_000);
        let model = self.trainer.model();
        let synth = synthesize(&model, n_synthetic, self.seed ^ 0x5bd1_e995).map_err(err_to_js)?;

        let mut ks_parts = Vec::new();
        let mut hist_parts = Vec::new();
        for j in 0..self.train_data.feature_count() {
            let real = self.held_out.column(j);
            let fake = synth.column(j);
            let test = ks_test(&fake, &real).map_err(err_to_js)?;
            ks_parts.push(format!(
                "{{\"feature\":\"{}\",\"d\":{},\"p\":{}}}",
                self.train_data.feature_names[j], test.statistic, test.p_value
            ));
            let bins = 20usize;
            let mut real_hist = vec![0usize; bins];
            let mut fake_hist = vec![0usize; bins];
            for &v in &real {
                real_hist[((v * bins as f64) as usize).min(bins - 1)] += 1;
            }
            for &v in &fake {
                fake_hist[((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1)] += 1;
            }
            let to_json = |h: &[usize]| {
                let vals: Vec<f64> = h.iter().map(|&c| c as f64).collect();
                json_f64_array(&vals)
            };
            hist_parts.push(format!(
                "{{\"feature\":\"{}\",\"real\":{},\"synthetic\":{}}}",
                self.train_data.feature_names[j],
                to_json(&real_hist),
                to_json(&fake_hist)
            ));
        }

        let formula = Formula::all_features(&self.held_out);
        let arm_json = |data: &Dataset| -> Result<String, JsValue> {
            let spf = fit_spf(data, &formula).map_err(err_to_js)?;
            let mu = spf.predict_dataset(&self.held_out).map_err(err_to_js)?;
            let eb: Vec<f64> = mu
                .iter()
                .zip(&self.held_out.counts)
                .map(|(&m, &y)| eb_estimate(m, y, spf.dispersion).map(|e| e.eb))
                .collect::<crashgan_core::Result<_>>()
                .map_err(err_to_js)?;
            let truth = HotspotRanking::from_scores(
                self.held_out
                    .true_means
                    .as_ref()
                    .ok_or_else(|| JsValue::from_str("held-out set lacks true means"))?,
            );
            let suggested = HotspotRanking::from_scores(&eb);
            let fi = multi_k_average(|k| fi_test(&suggested, &truth, k), &[5, 10, 15, 20])
                .map_err(err_to_js)?;
            Ok(format!(
                "{{\"coefficients\":{},\"dispersion\":{},\"fi\":{fi},\"true_dispersion\":{}}}",
                json_f64_array(&spf.coefficients),
                spf.dispersion,
                self.dispersion
            ))
        };
        let base = arm_json(&self.held_out)?;
        let augmented_data = self.held_out.concat(&synth).map_err(err_to_js)?;
        let augmented = arm_json(&augmented_data)?;

        Ok(format!(
            "{{\"ks\":[{}],\"histograms\":[{}],\"base\":{base},\"augmented\":{augmented},\"epochs\":{}}}",
            ks_parts.join(","),
            hist_parts.join(","),
            self.trainer.epochs_completed()
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_counts_emits_valid_shape() {
        let json = simulate_counts(0.5, 0.5, 500, 7).unwrap();
        assert!(json.contains("\"histogram\":["));
        assert!(json.contains("\"var_mean_ratio\":"));
    }

    #[test]
    fn trainer_steps_and_compares() {
        let mut demo = DemoTrainer::new(0.5, 60, 11).unwrap();
        let step = demo.step(5).unwrap();
        assert!(step.contains("\"epochs\":5"));
        assert_eq!(demo.epochs_completed(), 5);
        let cmp = demo.compare(100).unwrap();
        assert!(cmp.contains("\"ks\":["));
        assert!(cmp.contains("\"base\":{"));
        assert!(cmp.contains("\"augmented\":{"));
    }
}
