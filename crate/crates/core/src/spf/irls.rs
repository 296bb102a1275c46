//! Maximum-likelihood Poisson regression with log link, fitted by
//! iteratively reweighted least squares.

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::spf::linalg::SymMatrix;

const MAX_ITERATIONS: usize = 100;
const CONVERGENCE_TOL: f64 = 1e-8;
/// Linear predictors are capped here to keep exp() finite while the
/// iteration is still far from the optimum.
const ETA_CAP: f64 = 30.0;

/// Coefficients and covariance from a converged Poisson fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonFit {
    /// Intercept first, then one entry per feature column.
    pub coefficients: Vec<f64>,
    /// Inverse Fisher information at the optimum.
    pub covariance: SymMatrix,
    pub iterations: usize,
}

impl PoissonFit {
    /// Fitted mean for a design row (without intercept).
    pub fn mean(&self, row: &[f64]) -> f64 {
        let eta: f64 = self.coefficients[0]
            + self
                .coefficients[1..]
                .iter()
                .zip(row)
                .map(|(b, x)| b * x)
                .sum::<f64>();
        eta.min(ETA_CAP).exp()
    }
}

/// Fits `E[y] = exp(b0 + b . x)` by IRLS. `rows` are feature rows without
/// the intercept column; weights multiply each observation's contribution
/// (all 1 for plain fits).
pub fn fit_poisson(rows: &[Vec<f64>], counts: &[u32]) -> Result<PoissonFit> {
    let p = rows.first().map_or(0, Vec::len);
    let n = rows.len();
    if n < p + 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least {} rows to fit {} coefficients, got {n}",
            p + 2,
            p + 1
        )));
    }
    if counts.len() != n {
        return Err(Error::DimensionMismatch {
            location: "counts".into(),
            expected: n,
            got: counts.len(),
        });
    }
    let total: f64 = counts.iter().map(|&c| f64::from(c)).sum();
    if total == 0.0 {
        return Err(Error::DegenerateResponse);
    }

    let dim = p + 1;
    // Intercept initialized at ln(mean + 0.1); slopes at zero. Robust for
    // all-small-count data.
    let mut beta = vec![0.0; dim];
    beta[0] = (total / n as f64 + 0.1).ln();

    let design_row = |i: usize, j: usize| -> f64 {
        if j == 0 {
            1.0
        } else {
            rows[i][j - 1]
        }
    };

    let mut trace = Vec::new();
    for iteration in 0..MAX_ITERATIONS {
        // Weighted normal equations: (X^T W X) delta-system with working
        // response z = eta + (y - mu)/mu and W = diag(mu).
        let mut xtwx = SymMatrix::zeros(dim);
        let mut xtwz = vec![0.0; dim];
        for i in 0..n {
            let eta: f64 = (0..dim).map(|j| beta[j] * design_row(i, j)).sum();
            let eta = eta.clamp(-ETA_CAP, ETA_CAP);
            let mu = eta.exp();
            let z = eta + (f64::from(counts[i]) - mu) / mu;
            for j in 0..dim {
                let xj = design_row(i, j);
                xtwz[j] += mu * xj * z;
                for k in 0..=j {
                    xtwx.add(j, k, mu * xj * design_row(i, k));
                }
            }
        }
        for j in 0..dim {
            for k in 0..j {
                let v = xtwx.get(j, k);
                xtwx.set(k, j, v);
            }
        }
        let new_beta = xtwx.solve(&xtwz)?;
        let delta = beta
            .iter()
            .zip(&new_beta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        trace.push(delta);
        beta = new_beta;
        if !beta.iter().all(|b| b.is_finite()) {
            return Err(Error::NonConvergence {
                iterations: iteration + 1,
                trace,
            });
        }
        if delta < CONVERGENCE_TOL {
            // Covariance = inverse Fisher information at the optimum.
            let mut info = SymMatrix::zeros(dim);
            for i in 0..n {
                let eta: f64 = (0..dim).map(|j| beta[j] * design_row(i, j)).sum();
                let mu = eta.clamp(-ETA_CAP, ETA_CAP).exp();
                for j in 0..dim {
                    for k in 0..dim {
                        info.add(j, k, mu * design_row(i, j) * design_row(i, k));
                    }
                }
            }
            return Ok(PoissonFit {
                coefficients: beta,
                covariance: info.inverse()?,
                iterations: iteration + 1,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intercept_only_recovers_log_mean() {
        let rows: Vec<Vec<f64>> = vec![vec![]; 3];
        let fit = fit_poisson(&rows, &[1, 2, 3]).unwrap();
        assert!((fit.coefficients[0] - 2.0_f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn all_zero_counts_is_degenerate() {
        let rows: Vec<Vec<f64>> = vec![vec![0.1], vec![0.4], vec![0.9], vec![0.3]];
        assert!(matches!(
            fit_poisson(&rows, &[0, 0, 0, 0]),
            Err(Error::DegenerateResponse)
        ));
    }

    #[test]
    fn duplicate_feature_reports_collinearity() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let v = f64::from(i) / 20.0;
                vec![v, v]
            })
            .collect();
        let counts: Vec<u32> = (0..20).map(|i| u32::from(i % 3 == 0) + 1).collect();
        assert!(matches!(
            fit_poisson(&rows, &counts),
            Err(Error::CollinearFeatures)
        ));
    }

    #[test]
    fn score_equation_holds_at_convergence() {
        use crate::simulate::{gen_dataset, SimConfig};
        let sim = gen_dataset(&SimConfig {
            dispersion: 0.5,
            sample_size: 500,
            seed: 81,
            ..SimConfig::default()
        })
        .unwrap();
        let fit = fit_poisson(&sim.data.features, &sim.data.counts).unwrap();
        let dim = fit.coefficients.len();
        let mut score = vec![0.0; dim];
        for (row, &y) in sim.data.features.iter().zip(&sim.data.counts) {
            let resid = f64::from(y) - fit.mean(row);
            score[0] += resid;
            for j in 1..dim {
                score[j] += row[j - 1] * resid;
            }
        }
        for s in score {
            assert!(s.abs() < 1e-6, "score residual {s}");
        }
    }

    #[test]
    fn recovers_coefficients_on_large_poisson_sample() {
        // No heterogeneity: tiny dispersion approximates a pure Poisson.
        use crate::simulate::{gen_dataset, SimConfig};
        let sim = gen_dataset(&SimConfig {
            dispersion: 1e-9,
            sample_size: 10_000,
            seed: 82,
            ..SimConfig::default()
        })
        .unwrap();
        let fit = fit_poisson(&sim.data.features, &sim.data.counts).unwrap();
        let truth = [0.5, 0.5, -0.5, 1.0, -1.0];
        for (b, t) in fit.coefficients.iter().zip(truth) {
            assert!((b - t).abs() < 0.05, "coefficient {b} vs {t}");
        }
    }
}
