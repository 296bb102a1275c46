use crate::error::{Error, Result};
use crate::nn::network::{DenseNetwork, Gradients};

/// Adam optimizer state for one parameter vector.
///
/// The effective learning rate follows inverse-time decay,
/// `lr_t = lr / (1 + decay * t)` with `t` the zero-based step (epoch)
/// index, so the first step uses `lr` unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step_count: u64,
    pub learning_rate: f64,
    pub decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(param_count: usize, learning_rate: f64, decay: f64) -> Result<Self> {
        if learning_rate <= 0.0 {
            return Err(Error::InvalidParameter("learning rate must be > 0".into()));
        }
        if decay < 0.0 {
            return Err(Error::InvalidParameter("decay must be >= 0".into()));
        }
        Ok(AdamState {
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
            step_count: 0,
            learning_rate,
            decay,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Learning rate the next step will use.
    pub fn effective_lr(&self) -> f64 {
        self.learning_rate / (1.0 + self.decay * self.step_count as f64)
    }

    /// One bias-corrected Adam update over a flat parameter slice.
    pub fn step_slice(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.first_moment.len() {
            return Err(Error::DimensionMismatch {
                location: "adam params".into(),
                expected: self.first_moment.len(),
                got: params.len(),
            });
        }
        if grads.len() != params.len() {
            return Err(Error::DimensionMismatch {
                location: "adam grads".into(),
                expected: params.len(),
                got: grads.len(),
            });
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::TrainingDiverged {
                epoch: self.step_count as usize,
                what: format!("non-finite gradient at parameter {i}: {}", grads[i]),
            });
        }
        let lr = self.effective_lr();
        self.step_count += 1;
        let t = self.step_count as i32;
        let bias1 = 1.0 - self.beta1.powi(t);
        let bias2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.first_moment[i] = self.beta1 * self.first_moment[i] + (1.0 - self.beta1) * g;
            self.second_moment[i] =
                self.beta2 * self.second_moment[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.first_moment[i] / bias1;
            let v_hat = self.second_moment[i] / bias2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

/// Applies one Adam step to every parameter of a network using gradients
/// from [`DenseNetwork::backward`].
pub fn adam_step(net: &mut DenseNetwork, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    let flat_grads = grads.flat_params();
    let mut flat_params = net.flat_params();
    state.step_slice(&mut flat_params, &flat_grads)?;
    for (p, v) in net.params_mut().zip(flat_params) {
        *p = v;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut state = AdamState::new(3, 0.01, 0.0).unwrap();
        let mut params = vec![1.0, -2.0, 0.5];
        state.step_slice(&mut params, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(params, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_hand_computation() {
        // theta = 0, g = 1, lr = 0.001: m_hat = 1, v_hat = 1,
        // theta -> -0.001 / (1 + 1e-8).
        let mut state = AdamState::new(1, 0.001, 0.0).unwrap();
        let mut params = vec![0.0];
        state.step_slice(&mut params, &[1.0]).unwrap();
        let expected = -0.001 / (1.0 + 1e-8);
        assert!((params[0] - expected).abs() < 1e-15, "{}", params[0]);
        assert!((params[0] + 0.001).abs() < 1e-8);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn inverse_time_decay_schedule() {
        let mut state = AdamState::new(1, 0.001, 0.001).unwrap();
        assert_eq!(state.effective_lr(), 0.001);
        state.step_count = 1000;
        assert!((state.effective_lr() - 0.0005).abs() < 1e-18);
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let mut state = AdamState::new(2, 0.001, 0.0).unwrap();
        let mut params = vec![0.0, 0.0];
        let err = state.step_slice(&mut params, &[1.0, f64::NAN]);
        assert!(matches!(err, Err(Error::TrainingDiverged { .. })));
    }

    #[test]
    fn steps_are_deterministic() {
        let run = || {
            let mut state = AdamState::new(2, 0.01, 0.5).unwrap();
            let mut params = vec![0.3, -0.4];
            for k in 0..50 {
                let g = [params[0] * 0.7 + k as f64 * 1e-3, params[1]];
                state.step_slice(&mut params, &g).unwrap();
            }
            params
        };
        assert_eq!(run(), run());
    }
}
