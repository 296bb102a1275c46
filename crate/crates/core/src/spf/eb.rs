//! Empirical Bayes blending of the SPF prediction with the observed count.

use crate::error::{Error, Result};

/// Which term receives the weight `1 / (1 + alpha * mu)`.
///
/// `PredictionWeighted` is the default: the SPF prediction gets
/// `1/(1+alpha*mu)` and the observed count gets `alpha*mu/(1+alpha*mu)`,
/// so low dispersion means high trust in the SPF. `ObservationWeighted`
/// swaps the two weights and is provided as a selectable alternative;
/// reports state which one was active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EbWeighting {
    #[default]
    PredictionWeighted,
    ObservationWeighted,
}

impl EbWeighting {
    pub fn name(self) -> &'static str {
        match self {
            EbWeighting::PredictionWeighted => "prediction-weighted",
            EbWeighting::ObservationWeighted => "observation-weighted",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "prediction-weighted" => Ok(EbWeighting::PredictionWeighted),
            "observation-weighted" => Ok(EbWeighting::ObservationWeighted),
            other => Err(Error::InvalidParameter(format!(
                "unknown EB weighting {other:?}"
            ))),
        }
    }
}

/// One site's empirical Bayes estimate of the long-term crash mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbEstimate {
    /// SPF-predicted crash frequency.
    pub mu: f64,
    /// Observed count.
    pub observed: u32,
    /// Blended estimate; always between `mu` and `observed`.
    pub eb: f64,
    /// Weight applied to `mu`.
    pub weight: f64,
}

/// EB estimate with the default prediction-weighted blend.
pub fn eb_estimate(mu: f64, observed: u32, dispersion: f64) -> Result<EbEstimate> {
    eb_estimate_with(mu, observed, dispersion, EbWeighting::default())
}

pub fn eb_estimate_with(
    mu: f64,
    observed: u32,
    dispersion: f64,
    weighting: EbWeighting,
) -> Result<EbEstimate> {
    if mu <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "EB needs a positive prediction, got {mu}"
        )));
    }
    if dispersion < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "EB needs dispersion >= 0, got {dispersion}"
        )));
    }
    let w_mu = match weighting {
        EbWeighting::PredictionWeighted => 1.0 / (1.0 + dispersion * mu),
        EbWeighting::ObservationWeighted => dispersion * mu / (1.0 + dispersion * mu),
    };
    let eb = w_mu * mu + (1.0 - w_mu) * f64::from(observed);
    Ok(EbEstimate {
        mu,
        observed,
        eb,
        weight: w_mu,
    })
}
