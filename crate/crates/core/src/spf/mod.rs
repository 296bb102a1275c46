//! Negative-binomial safety performance functions of the form
//! `mu = exp(b0 + sum_j b_j t_j(x_j))` where each term is the raw feature
//! or its natural log. Estimation is two-step: Poisson maximum likelihood
//! for the coefficients, then auxiliary OLS on the fitted means for the
//! dispersion parameter.

pub mod dispersion;
pub mod eb;
pub mod irls;
pub mod linalg;
pub mod significance;

use std::fmt::Write as _;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::serialize::LineReader;

pub use dispersion::estimate_dispersion;
pub use eb::{eb_estimate, eb_estimate_with, EbEstimate, EbWeighting};
pub use irls::{fit_poisson, PoissonFit};
pub use linalg::SymMatrix;
pub use significance::{coefficient_significance, CoefficientTest};

/// Which dataset columns enter the model and whether each enters as ln(x).
#[derive(Debug, Clone, PartialEq)]
pub struct Formula {
    pub features: Vec<String>,
    pub log_transform: Vec<bool>,
}

impl Formula {
    pub fn new(features: Vec<String>, log_transform: Vec<bool>) -> Result<Self> {
        if features.len() != log_transform.len() {
            return Err(Error::DimensionMismatch {
                location: "formula log flags".into(),
                expected: features.len(),
                got: log_transform.len(),
            });
        }
        Ok(Formula {
            features,
            log_transform,
        })
    }

    /// Every dataset feature, untransformed.
    pub fn all_features(data: &Dataset) -> Formula {
        Formula {
            features: data.feature_names.clone(),
            log_transform: vec![false; data.feature_count()],
        }
    }

    /// Every dataset feature entering as ln(x); the usual form for
    /// traffic-volume exposure variables.
    pub fn all_features_logged(data: &Dataset) -> Formula {
        Formula {
            features: data.feature_names.clone(),
            log_transform: vec![true; data.feature_count()],
        }
    }
}

/// A fitted SPF: coefficients (intercept first), dispersion, and the
/// coefficient covariance from the Poisson step.
#[derive(Debug, Clone, PartialEq)]
pub struct SpfModel {
    pub coefficients: Vec<f64>,
    pub dispersion: f64,
    pub feature_names: Vec<String>,
    pub log_transform: Vec<bool>,
    pub covariance: SymMatrix,
}

impl SpfModel {
    /// Display label of term `j` (0-based, excluding the intercept).
    pub fn term_label(&self, j: usize) -> String {
        if self.log_transform[j] {
            format!("ln({})", self.feature_names[j])
        } else {
            self.feature_names[j].clone()
        }
    }

    /// Predicted crash frequency for one row of raw feature values in the
    /// model's term order.
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                location: "prediction features".into(),
                expected: self.feature_names.len(),
                got: features.len(),
            });
        }
        let mut eta = self.coefficients[0];
        for (j, &x) in features.iter().enumerate() {
            let term = if self.log_transform[j] {
                if x <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "feature {} must be > 0 for a log term, got {x}",
                        self.feature_names[j]
                    )));
                }
                x.ln()
            } else {
                x
            };
            eta += self.coefficients[j + 1] * term;
        }
        Ok(eta.exp())
    }

    /// Predictions for every row of a dataset, matching features by name.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        let indices: Vec<usize> = self
            .feature_names
            .iter()
            .map(|name| {
                data.column_index(name).ok_or_else(|| {
                    Error::InvalidParameter(format!("dataset lacks feature {name:?}"))
                })
            })
            .collect::<Result<_>>()?;
        data.features
            .iter()
            .map(|row| {
                let values: Vec<f64> = indices.iter().map(|&i| row[i]).collect();
                self.predict(&values)
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "spfmodel v1");
        let _ = writeln!(out, "terms {}", self.feature_names.len());
        for (name, &log) in self.feature_names.iter().zip(&self.log_transform) {
            let _ = writeln!(out, "term {} {name}", u8::from(log));
        }
        let _ = writeln!(out, "coefficients {}", self.coefficients.len());
        let line = self
            .coefficients
            .iter()
            .map(|c| format!("{c}"))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, "{line}");
        let _ = writeln!(out, "dispersion {}", self.dispersion);
        let _ = writeln!(out, "covariance {}", self.covariance.dim);
        for i in 0..self.covariance.dim {
            let row = (0..self.covariance.dim)
                .map(|j| format!("{}", self.covariance.get(i, j)))
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(out, "{row}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<SpfModel> {
        let mut reader = LineReader::new(text);
        reader.expect_line("spfmodel v1")?;
        let n_terms = reader.expect_counted("terms")?;
        let mut feature_names = Vec::with_capacity(n_terms);
        let mut log_transform = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            let (lineno, line) = reader.next_line()?;
            let mut parts = line.splitn(3, ' ');
            if parts.next() != Some("term") {
                return Err(Error::Parse {
                    line: lineno,
                    message: "expected `term <log> <name>`".into(),
                });
            }
            let log: u8 = parts.next().and_then(|s| s.parse().ok()).ok_or(Error::Parse {
                line: lineno,
                message: "bad log flag".into(),
            })?;
            let name = parts.next().ok_or(Error::Parse {
                line: lineno,
                message: "missing term name".into(),
            })?;
            feature_names.push(name.trim().to_string());
            log_transform.push(log == 1);
        }
        let n_coef = reader.expect_counted("coefficients")?;
        let mut coefficients = Vec::with_capacity(n_coef);
        reader.read_values(n_coef, &mut coefficients)?;
        let (lineno, line) = reader.next_line()?;
        let dispersion: f64 = line
            .strip_prefix("dispersion ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or(Error::Parse {
                line: lineno,
                message: "expected `dispersion <value>`".into(),
            })?;
        let dim = reader.expect_counted("covariance")?;
        let mut values = Vec::with_capacity(dim * dim);
        for _ in 0..dim {
            reader.read_values(dim, &mut values)?;
        }
        Ok(SpfModel {
            coefficients,
            dispersion,
            feature_names,
            log_transform,
            covariance: SymMatrix { dim, values },
        })
    }
}

/// Two-step SPF fit on a dataset: Poisson IRLS for the coefficients, then
/// auxiliary OLS for the dispersion. Real and synthetic rows carry equal
/// weight.
pub fn fit_spf(data: &Dataset, formula: &Formula) -> Result<SpfModel> {
    if formula.features.is_empty() {
        return Err(Error::InvalidParameter("formula selects no features".into()));
    }
    let indices: Vec<usize> = formula
        .features
        .iter()
        .map(|name| {
            data.column_index(name)
                .ok_or_else(|| Error::InvalidParameter(format!("dataset lacks feature {name:?}")))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(data.len());
    for (i, row) in data.features.iter().enumerate() {
        let mut design = Vec::with_capacity(indices.len());
        for (term, (&col, &log)) in indices.iter().zip(&formula.log_transform).enumerate() {
            let x = row[col];
            design.push(if log {
                if x <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "row {i}: feature {} must be > 0 for a log term, got {x}",
                        formula.features[term]
                    )));
                }
                x.ln()
            } else {
                x
            });
        }
        rows.push(design);
    }
    let fit = fit_poisson(&rows, &data.counts)?;
    let fitted: Vec<f64> = rows.iter().map(|r| fit.mean(r)).collect();
    let dispersion = estimate_dispersion(&data.counts, &fitted)?;
    Ok(SpfModel {
        coefficients: fit.coefficients,
        dispersion,
        feature_names: formula.features.clone(),
        log_transform: formula.log_transform.clone(),
        covariance: fit.covariance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{gen_dataset, SimConfig};

    #[test]
    fn recovers_generator_coefficients_within_noise() {
        let sim = gen_dataset(&SimConfig {
            sample_size: 4_000,
            seed: 91,
            ..SimConfig::default()
        })
        .unwrap();
        let model = fit_spf(&sim.data, &Formula::all_features(&sim.data)).unwrap();
        let truth = [0.5, 0.5, -0.5, 1.0, -1.0];
        for (b, t) in model.coefficients.iter().zip(truth) {
            assert!((b - t).abs() < 0.15, "{b} vs {t}");
        }
        assert!((model.dispersion - 0.5).abs() < 0.25);
    }

    #[test]
    fn bias_shrinks_with_sample_size() {
        let fit_at = |n: usize| {
            let sim = gen_dataset(&SimConfig {
                sample_size: n,
                seed: 92,
                ..SimConfig::default()
            })
            .unwrap();
            fit_spf(&sim.data, &Formula::all_features(&sim.data)).unwrap()
        };
        let truth = [0.5, 0.5, -0.5, 1.0, -1.0];
        let err = |m: &SpfModel| {
            m.coefficients
                .iter()
                .zip(truth)
                .map(|(b, t)| (b - t).abs())
                .sum::<f64>()
        };
        let small = fit_at(300);
        let large = fit_at(50_000);
        assert!(err(&large) < err(&small));
        // Five coefficients at n = 50k under NB noise: total absolute
        // error well inside the sampling band.
        assert!(err(&large) < 0.15, "total error {}", err(&large));
    }

    #[test]
    fn empty_augmentation_is_identity() {
        let sim = gen_dataset(&SimConfig {
            sample_size: 100,
            seed: 93,
            ..SimConfig::default()
        })
        .unwrap();
        let formula = Formula::all_features(&sim.data);
        let base = fit_spf(&sim.data, &formula).unwrap();
        let empty = Dataset::new(
            sim.data.feature_names.clone(),
            Vec::new(),
            Vec::new(),
        )
        .unwrap();
        let augmented = fit_spf(&sim.data.concat(&empty).unwrap(), &formula).unwrap();
        assert_eq!(base, augmented);
    }

    #[test]
    fn predict_hand_case_with_published_shape() {
        // mu = exp(-4.64 + 0.53 ln(10000)) ~ 1.2731
        let model = SpfModel {
            coefficients: vec![-4.64, 0.53],
            dispersion: 0.0,
            feature_names: vec!["aadt_major".into()],
            log_transform: vec![true],
            covariance: SymMatrix::zeros(2),
        };
        let mu = model.predict(&[10_000.0]).unwrap();
        assert!((mu - 1.2731).abs() < 1e-3, "mu = {mu}");
    }

    #[test]
    fn predict_zero_coefficients_gives_one() {
        let model = SpfModel {
            coefficients: vec![0.0, 0.0],
            dispersion: 0.0,
            feature_names: vec!["x1".into()],
            log_transform: vec![false],
            covariance: SymMatrix::zeros(2),
        };
        assert_eq!(model.predict(&[123.4]).unwrap(), 1.0);
    }

    #[test]
    fn predict_is_monotone_in_positive_coefficients() {
        let model = SpfModel {
            coefficients: vec![0.1, 0.8],
            dispersion: 0.0,
            feature_names: vec!["x1".into()],
            log_transform: vec![false],
            covariance: SymMatrix::zeros(2),
        };
        assert!(model.predict(&[0.9]).unwrap() > model.predict(&[0.3]).unwrap());
    }

    #[test]
    fn log_term_rejects_non_positive_values() {
        let model = SpfModel {
            coefficients: vec![0.0, 1.0],
            dispersion: 0.0,
            feature_names: vec!["aadt".into()],
            log_transform: vec![true],
            covariance: SymMatrix::zeros(2),
        };
        assert!(model.predict(&[0.0]).is_err());
    }

    #[test]
    fn model_text_round_trip() {
        let sim = gen_dataset(&SimConfig {
            sample_size: 200,
            seed: 94,
            ..SimConfig::default()
        })
        .unwrap();
        let model = fit_spf(&sim.data, &Formula::all_features(&sim.data)).unwrap();
        let back = SpfModel::from_text(&model.to_text()).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn real_data_style_formula_has_log_shape() {
        let data = crate::simulate::gen_intersection_dataset(300, 95).unwrap();
        let model = fit_spf(&data, &Formula::all_features_logged(&data)).unwrap();
        assert_eq!(model.term_label(0), "ln(aadt_major)");
        assert_eq!(model.coefficients.len(), 3);
        // exposure coefficients should be positive
        assert!(model.coefficients[1] > 0.0);
    }
}
