/// Predictions are clamped into `[EPS_CLAMP, 1 - EPS_CLAMP]` before the
/// logs so the loss stays finite at the extremes.
pub const EPS_CLAMP: f64 = 1e-7;

/// Binary cross entropy `-(t ln p + (1-t) ln(1-p))` for a target of 0 or 1.
pub fn bce_loss(prediction: f64, target: f64) -> f64 {
    let p = prediction.clamp(EPS_CLAMP, 1.0 - EPS_CLAMP);
    -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
}

/// Derivative of [`bce_loss`] with respect to the prediction.
pub fn bce_grad(prediction: f64, target: f64) -> f64 {
    let p = prediction.clamp(EPS_CLAMP, 1.0 - EPS_CLAMP);
    -(target / p) + (1.0 - target) / (1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_value() {
        // Both GAN losses sit at -ln(0.5) when the discriminator outputs 0.5.
        assert!((bce_loss(0.5, 1.0) - 0.693_147_180_559_945_3).abs() < 1e-12);
        assert!((bce_loss(0.5, 0.0) - 0.693_147_180_559_945_3).abs() < 1e-12);
    }

    #[test]
    fn perfect_prediction_is_near_zero() {
        assert!(bce_loss(1.0 - EPS_CLAMP, 1.0) < 1e-6);
        assert!(bce_loss(EPS_CLAMP, 0.0) < 1e-6);
    }

    #[test]
    fn hand_evaluated_case() {
        // p = 0.9, t = 0: -ln(0.1)
        assert!((bce_loss(0.9, 0.0) - 2.302_585_092_994_046).abs() < 1e-12);
    }

    #[test]
    fn loss_is_nonnegative_and_finite() {
        for &p in &[0.0, 1e-9, 0.2, 0.5, 0.8, 1.0 - 1e-9, 1.0] {
            for &t in &[0.0, 1.0] {
                let l = bce_loss(p, t);
                assert!(l.is_finite() && l >= 0.0, "p={p} t={t} -> {l}");
            }
        }
    }

    #[test]
    fn grad_matches_finite_differences() {
        for &p in &[0.1, 0.4, 0.5, 0.9] {
            for &t in &[0.0, 1.0] {
                let h = 1e-7;
                let numeric = (bce_loss(p + h, t) - bce_loss(p - h, t)) / (2.0 * h);
                assert!((bce_grad(p, t) - numeric).abs() < 1e-4);
            }
        }
    }
}
