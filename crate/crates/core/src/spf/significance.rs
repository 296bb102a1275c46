//! Wald z-statistics and two-sided normal p-values for fitted coefficients.

use crate::spf::SpfModel;
use crate::stats::special::normal_cdf;

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTest {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    /// `None` when the standard error is zero and the statistic is undefined.
    pub z_value: Option<f64>,
    pub p_value: Option<f64>,
}

/// One Wald test per coefficient, intercept first.
pub fn coefficient_significance(model: &SpfModel) -> Vec<CoefficientTest> {
    let mut out = Vec::with_capacity(model.coefficients.len());
    for (j, &estimate) in model.coefficients.iter().enumerate() {
        let name = if j == 0 {
            "intercept".to_string()
        } else {
            model.term_label(j - 1)
        };
        let variance = model.covariance.get(j, j);
        let std_error = variance.max(0.0).sqrt();
        let (z_value, p_value) = if std_error > 0.0 {
            let z = estimate / std_error;
            (Some(z), Some((2.0 * (1.0 - normal_cdf(z.abs()))).clamp(0.0, 1.0)))
        } else {
            (None, None)
        };
        out.push(CoefficientTest {
            name,
            estimate,
            std_error,
            z_value,
            p_value,
        });
    }
    out
}
