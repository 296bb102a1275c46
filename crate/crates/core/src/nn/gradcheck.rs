//! Numerical verification of the backward pass against central finite
//! differences.

use crate::error::{Error, Result};
use crate::nn::network::{DenseNetwork, Gradients};

/// Gradients below this magnitude are compared against an absolute floor
/// instead of relatively, so finite-difference cancellation noise on
/// near-zero entries does not dominate the reported error.
const REL_FLOOR: f64 = 1e-5;

/// Worst relative error between `analytic` parameter gradients and central
/// finite differences of the scalar objective `sum(output)`.
pub fn fd_relative_error(
    net: &DenseNetwork,
    inputs: &[&[f64]],
    analytic: &Gradients,
    h: f64,
) -> Result<f64> {
    let flat_analytic = analytic.flat_params();
    let base_params = net.flat_params();
    if flat_analytic.len() != base_params.len() {
        return Err(Error::DimensionMismatch {
            location: "gradient check".into(),
            expected: base_params.len(),
            got: flat_analytic.len(),
        });
    }
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (idx, &a) in flat_analytic.iter().enumerate() {
        let numeric = {
            let mut perturbed = base_params.clone();
            perturbed[idx] = base_params[idx] + h;
            set_params(&mut probe, &perturbed);
            let plus: f64 = probe.forward(inputs)?.iter().sum();
            perturbed[idx] = base_params[idx] - h;
            set_params(&mut probe, &perturbed);
            let minus: f64 = probe.forward(inputs)?.iter().sum();
            (plus - minus) / (2.0 * h)
        };
        let diff = (a - numeric).abs();
        let rel = diff / numeric.abs().max(REL_FLOOR);
        if rel > worst {
            worst = rel;
        }
    }
    Ok(worst)
}

/// Runs a forward/backward pass with an all-ones upstream gradient and
/// reports the worst relative disagreement with central differences over
/// every weight and bias.
pub fn gradient_check(net: &DenseNetwork, inputs: &[&[f64]], h: f64) -> Result<f64> {
    if !(h > 0.0 && h <= 1e-3) {
        return Err(Error::InvalidParameter(format!(
            "step size h must lie in (0, 1e-3], got {h}"
        )));
    }
    let cache = net.forward_cached(inputs)?;
    let upstream = vec![1.0; net.output_dim()];
    let grads = net.backward(&cache, &upstream)?;
    fd_relative_error(net, inputs, &grads, h)
}

fn set_params(net: &mut DenseNetwork, values: &[f64]) {
    for (p, v) in net.params_mut().zip(values) {
        *p = *v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::activation::Activation;
    use crate::nn::layer::DenseLayer;
    use crate::rng::stream;

    #[test]
    fn linear_map_checks_exactly() {
        let layer = DenseLayer::from_parts(
            2,
            2,
            vec![0.5, -1.25, 2.0, 0.75],
            vec![0.1, -0.2],
            Activation::Identity,
        )
        .unwrap();
        let net = DenseNetwork::stack(vec![layer]).unwrap();
        let err = gradient_check(&net, &[&[0.7, -0.3]], 1e-5).unwrap();
        assert!(err < 1e-10, "err = {err}");
    }

    #[test]
    fn three_layer_random_net_below_tolerance() {
        let mut rng = stream(21, "gradcheck", 0);
        let net = DenseNetwork::stack(vec![
            DenseLayer::glorot(4, 6, Activation::Elu, &mut rng).unwrap(),
            DenseLayer::glorot(6, 5, Activation::Sigmoid, &mut rng).unwrap(),
            DenseLayer::glorot(5, 3, Activation::Elu, &mut rng).unwrap(),
        ])
        .unwrap();
        let err = gradient_check(&net, &[&[0.4, -0.9, 0.2, 0.6]], 1e-5).unwrap();
        assert!(err < 1e-4, "err = {err}");
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let mut rng = stream(21, "gradcheck", 1);
        let net = DenseNetwork::stack(vec![
            DenseLayer::glorot(3, 4, Activation::Elu, &mut rng).unwrap(),
            DenseLayer::glorot(4, 2, Activation::Identity, &mut rng).unwrap(),
        ])
        .unwrap();
        let inputs: &[&[f64]] = &[&[0.5, -0.2, 0.8]];
        let cache = net.forward_cached(inputs).unwrap();
        let mut grads = net.backward(&cache, &[1.0, 1.0]).unwrap();
        grads.scale(2.0);
        let err = fd_relative_error(&net, inputs, &grads, 1e-5).unwrap();
        assert!((err - 1.0).abs() < 0.01, "err = {err}");
    }

    #[test]
    fn invalid_step_size_rejected() {
        let net = DenseNetwork::stack(vec![DenseLayer::from_parts(
            1,
            1,
            vec![1.0],
            vec![0.0],
            Activation::Identity,
        )
        .unwrap()])
        .unwrap();
        assert!(gradient_check(&net, &[&[1.0]], 0.0).is_err());
        assert!(gradient_check(&net, &[&[1.0]], 0.01).is_err());
    }
}
