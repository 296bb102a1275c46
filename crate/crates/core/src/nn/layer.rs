use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::activation::Activation;

/// A dense layer `a = activation(W x + b)`. Weights are row-major with
/// shape `(out_dim, in_dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
    activation: Activation,
}

/// Gradient of a loss with respect to one layer's parameters; same layout
/// as the layer itself.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub d_weights: Vec<f64>,
    pub d_biases: Vec<f64>,
}

impl DenseLayer {
    /// Glorot-uniform initialization: weights from
    /// `U[-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))]`, zero biases.
    pub fn glorot<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidParameter(
                "layer dimensions must be >= 1".into(),
            ));
        }
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| (2.0 * rng.random::<f64>() - 1.0) * limit)
            .collect();
        Ok(DenseLayer {
            in_dim,
            out_dim,
            weights,
            biases: vec![0.0; out_dim],
            activation,
        })
    }

    pub fn from_parts(
        in_dim: usize,
        out_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if weights.len() != in_dim * out_dim {
            return Err(Error::DimensionMismatch {
                location: "layer weights".into(),
                expected: in_dim * out_dim,
                got: weights.len(),
            });
        }
        if biases.len() != out_dim {
            return Err(Error::DimensionMismatch {
                location: "layer biases".into(),
                expected: out_dim,
                got: biases.len(),
            });
        }
        Ok(DenseLayer {
            in_dim,
            out_dim,
            weights,
            biases,
            activation,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    pub(crate) fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.biases.iter_mut())
    }

    pub(crate) fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(self.biases.iter())
    }

    /// Computes pre-activations and outputs for one input vector.
    pub fn forward(&self, input: &[f64], pre: &mut Vec<f64>, out: &mut Vec<f64>) {
        debug_assert_eq!(input.len(), self.in_dim);
        pre.clear();
        out.clear();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let z = self.biases[o] + dot(row, input);
            pre.push(z);
            out.push(self.activation.apply(z));
        }
    }

    /// Accumulates parameter gradients into `grad` and writes the gradient
    /// with respect to the layer input into `d_input`.
    pub fn backward(
        &self,
        input: &[f64],
        pre: &[f64],
        out: &[f64],
        d_out: &[f64],
        grad: &mut LayerGrad,
        d_input: &mut [f64],
    ) {
        debug_assert_eq!(d_out.len(), self.out_dim);
        debug_assert_eq!(d_input.len(), self.in_dim);
        d_input.fill(0.0);
        for o in 0..self.out_dim {
            let dz = d_out[o] * self.activation.derivative(pre[o], out[o]);
            if dz == 0.0 {
                continue;
            }
            grad.d_biases[o] += dz;
            let row = o * self.in_dim;
            let w_row = &self.weights[row..row + self.in_dim];
            let g_row = &mut grad.d_weights[row..row + self.in_dim];
            for (((g, di), w), x) in g_row.iter_mut().zip(d_input.iter_mut()).zip(w_row).zip(input)
            {
                *g += dz * x;
                *di += w * dz;
            }
        }
    }

    /// Propagates the gradient to the layer input without touching
    /// parameter gradients; used when a network is frozen in the chain.
    pub fn backward_input_only(
        &self,
        pre: &[f64],
        out: &[f64],
        d_out: &[f64],
        d_input: &mut [f64],
    ) {
        debug_assert_eq!(d_out.len(), self.out_dim);
        debug_assert_eq!(d_input.len(), self.in_dim);
        d_input.fill(0.0);
        for o in 0..self.out_dim {
            let dz = d_out[o] * self.activation.derivative(pre[o], out[o]);
            if dz == 0.0 {
                continue;
            }
            let row = o * self.in_dim;
            let w_row = &self.weights[row..row + self.in_dim];
            for (di, w) in d_input.iter_mut().zip(w_row) {
                *di += w * dz;
            }
        }
    }

    pub fn zero_grad(&self) -> LayerGrad {
        LayerGrad {
            d_weights: vec![0.0; self.weights.len()],
            d_biases: vec![0.0; self.biases.len()],
        }
    }

    pub fn all_finite(&self) -> bool {
        self.params().all(|p| p.is_finite())
    }
}

/// Dot product with four independent accumulators so the loop both
/// pipelines and vectorizes; a single-chain sum is latency-bound and
/// dominates training time.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let a_chunks = a[..n].chunks_exact(4);
    let b_chunks = b[..n].chunks_exact(4);
    let a_rem = a_chunks.remainder();
    let b_rem = b_chunks.remainder();
    // Two lane-pairs so the vectorizer maps each pair to one register
    // without shuffles.
    let mut lo = [0.0f64; 2];
    let mut hi = [0.0f64; 2];
    for (ca, cb) in a_chunks.zip(b_chunks) {
        lo[0] += ca[0] * cb[0];
        lo[1] += ca[1] * cb[1];
        hi[0] += ca[2] * cb[2];
        hi[1] += ca[3] * cb[3];
    }
    let mut tail = 0.0;
    for (x, y) in a_rem.iter().zip(b_rem) {
        tail += x * y;
    }
    (lo[0] + hi[0]) + (lo[1] + hi[1]) + tail
}

impl LayerGrad {
    pub fn add_assign(&mut self, other: &LayerGrad) {
        for (a, b) in self.d_weights.iter_mut().zip(&other.d_weights) {
            *a += b;
        }
        for (a, b) in self.d_biases.iter_mut().zip(&other.d_biases) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for g in self.d_weights.iter_mut().chain(self.d_biases.iter_mut()) {
            *g *= factor;
        }
    }
}
