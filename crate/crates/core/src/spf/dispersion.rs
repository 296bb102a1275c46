//! Auxiliary OLS estimate of the NB dispersion parameter: regress
//! `z_i = ((y_i - mu_i)^2 - y_i) / mu_i` on `mu_i` with no constant, so
//! `alpha_hat = sum(mu_i z_i) / sum(mu_i^2)`. Negative estimates are
//! floored at zero (underdispersed samples).

use crate::error::{Error, Result};

pub fn estimate_dispersion(counts: &[u32], fitted_means: &[f64]) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::EmptyInput("dispersion estimation".into()));
    }
    if counts.len() != fitted_means.len() {
        return Err(Error::DimensionMismatch {
            location: "fitted means".into(),
            expected: counts.len(),
            got: fitted_means.len(),
        });
    }
    if let Some(bad) = fitted_means.iter().find(|&&m| m <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fitted means must be > 0, got {bad}"
        )));
    }
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (&y, &mu) in counts.iter().zip(fitted_means) {
        let y = f64::from(y);
        let z = ((y - mu) * (y - mu) - y) / mu;
        numerator += mu * z;
        denominator += mu * mu;
    }
    Ok((numerator / denominator).max(0.0))
}
