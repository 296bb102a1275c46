use crate::error::{Error, Result};
use crate::nn::layer::{DenseLayer, LayerGrad};

/// A feed-forward network of dense layers with one or two named inputs.
///
/// Two-input networks route each input through its own branch layer and
/// concatenate the branch outputs before the trunk, mirroring the
/// generator/discriminator wiring. A single-input network with no branch
/// layers feeds the trunk directly.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    branches: Vec<DenseLayer>,
    trunk: Vec<DenseLayer>,
}

/// Everything recorded during a forward pass; required by [`DenseNetwork::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub(crate) inputs: Vec<Vec<f64>>,
    branch_pre: Vec<Vec<f64>>,
    branch_out: Vec<Vec<f64>>,
    concat: Vec<f64>,
    trunk_pre: Vec<Vec<f64>>,
    trunk_out: Vec<Vec<f64>>,
}

impl ForwardCache {
    /// Final network output.
    pub fn output(&self) -> &[f64] {
        self.trunk_out.last().unwrap_or(&self.concat)
    }
}

/// Parameter and input gradients from one backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub branches: Vec<LayerGrad>,
    pub trunk: Vec<LayerGrad>,
    /// Gradient of the loss with respect to each input branch; lets a
    /// discriminator loss flow onward into the generator.
    pub inputs: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNetwork) -> Gradients {
        Gradients {
            branches: net.branches.iter().map(DenseLayer::zero_grad).collect(),
            trunk: net.trunk.iter().map(DenseLayer::zero_grad).collect(),
            inputs: net.input_dims().iter().map(|&d| vec![0.0; d]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.branches.iter_mut().zip(&other.branches) {
            a.add_assign(b);
        }
        for (a, b) in self.trunk.iter_mut().zip(&other.trunk) {
            a.add_assign(b);
        }
        for (a, b) in self.inputs.iter_mut().zip(&other.inputs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for g in self.branches.iter_mut().chain(self.trunk.iter_mut()) {
            g.scale(factor);
        }
        for input in &mut self.inputs {
            for x in input {
                *x *= factor;
            }
        }
    }

    /// Parameter gradients in canonical order (branches then trunk; per
    /// layer weights then biases).
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for g in self.branches.iter().chain(self.trunk.iter()) {
            out.extend_from_slice(&g.d_weights);
            out.extend_from_slice(&g.d_biases);
        }
        out
    }
}

impl DenseNetwork {
    /// A plain single-input layer stack.
    pub fn stack(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParameter("network needs >= 1 layer".into()));
        }
        Self::check_chain(&layers, layers[0].in_dim(), "trunk")?;
        Ok(DenseNetwork {
            branches: Vec::new(),
            trunk: layers,
        })
    }

    /// A multi-input network: one branch layer per input, outputs
    /// concatenated into the trunk.
    pub fn branched(branches: Vec<DenseLayer>, trunk: Vec<DenseLayer>) -> Result<Self> {
        if branches.is_empty() || trunk.is_empty() {
            return Err(Error::InvalidParameter(
                "branched network needs >= 1 branch and >= 1 trunk layer".into(),
            ));
        }
        let concat_width: usize = branches.iter().map(DenseLayer::out_dim).sum();
        if trunk[0].in_dim() != concat_width {
            return Err(Error::DimensionMismatch {
                location: "trunk layer 0".into(),
                expected: concat_width,
                got: trunk[0].in_dim(),
            });
        }
        Self::check_chain(&trunk, concat_width, "trunk")?;
        Ok(DenseNetwork { branches, trunk })
    }

    fn check_chain(layers: &[DenseLayer], mut width: usize, what: &str) -> Result<()> {
        for (i, layer) in layers.iter().enumerate() {
            if layer.in_dim() != width {
                return Err(Error::DimensionMismatch {
                    location: format!("{what} layer {i}"),
                    expected: width,
                    got: layer.in_dim(),
                });
            }
            width = layer.out_dim();
        }
        Ok(())
    }

    pub(crate) fn from_layers(branches: Vec<DenseLayer>, trunk: Vec<DenseLayer>) -> Result<Self> {
        if branches.is_empty() {
            Self::stack(trunk)
        } else {
            Self::branched(branches, trunk)
        }
    }

    pub fn branch_layers(&self) -> &[DenseLayer] {
        &self.branches
    }

    pub fn trunk_layers(&self) -> &[DenseLayer] {
        &self.trunk
    }

    /// Number of named input vectors this network expects.
    pub fn input_arity(&self) -> usize {
        if self.branches.is_empty() {
            1
        } else {
            self.branches.len()
        }
    }

    pub fn input_dims(&self) -> Vec<usize> {
        if self.branches.is_empty() {
            vec![self.trunk[0].in_dim()]
        } else {
            self.branches.iter().map(DenseLayer::in_dim).collect()
        }
    }

    /// Width of the trunk input (after concatenation for branched nets).
    pub fn concat_width(&self) -> usize {
        self.trunk[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.trunk.last().unwrap().out_dim()
    }

    pub fn param_count(&self) -> usize {
        self.branches
            .iter()
            .chain(self.trunk.iter())
            .map(DenseLayer::param_count)
            .sum()
    }

    pub fn all_finite(&self) -> bool {
        self.branches
            .iter()
            .chain(self.trunk.iter())
            .all(DenseLayer::all_finite)
    }

    /// Parameters in canonical order; pairs with [`Gradients::flat_params`].
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in self.branches.iter().chain(self.trunk.iter()) {
            out.extend(layer.params().copied());
        }
        out
    }

    pub(crate) fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.branches
            .iter_mut()
            .chain(self.trunk.iter_mut())
            .flat_map(DenseLayer::params_mut)
    }

    fn check_inputs(&self, inputs: &[&[f64]]) -> Result<()> {
        let dims = self.input_dims();
        if inputs.len() != dims.len() {
            return Err(Error::DimensionMismatch {
                location: "network inputs".into(),
                expected: dims.len(),
                got: inputs.len(),
            });
        }
        for (i, (input, dim)) in inputs.iter().zip(&dims).enumerate() {
            if input.len() != *dim {
                return Err(Error::DimensionMismatch {
                    location: format!("input {i}"),
                    expected: *dim,
                    got: input.len(),
                });
            }
        }
        Ok(())
    }

    /// Evaluates the network. Deterministic; no state is mutated.
    pub fn forward(&self, inputs: &[&[f64]]) -> Result<Vec<f64>> {
        Ok(self.forward_cached(inputs)?.output().to_vec())
    }

    /// Evaluates the network and records every intermediate value for a
    /// later [`DenseNetwork::backward`].
    pub fn forward_cached(&self, inputs: &[&[f64]]) -> Result<ForwardCache> {
        self.check_inputs(inputs)?;
        let mut branch_pre = Vec::with_capacity(self.branches.len());
        let mut branch_out = Vec::with_capacity(self.branches.len());
        let concat = if self.branches.is_empty() {
            inputs[0].to_vec()
        } else {
            let mut concat = Vec::with_capacity(self.concat_width());
            for (layer, input) in self.branches.iter().zip(inputs) {
                let mut pre = Vec::new();
                let mut out = Vec::new();
                layer.forward(input, &mut pre, &mut out);
                concat.extend_from_slice(&out);
                branch_pre.push(pre);
                branch_out.push(out);
            }
            concat
        };
        let mut trunk_pre = Vec::with_capacity(self.trunk.len());
        let mut trunk_out = Vec::with_capacity(self.trunk.len());
        for (idx, layer) in self.trunk.iter().enumerate() {
            let mut pre = Vec::new();
            let mut out = Vec::new();
            {
                let input = if idx == 0 { &concat } else { &trunk_out[idx - 1] };
                layer.forward(input, &mut pre, &mut out);
            }
            trunk_pre.push(pre);
            trunk_out.push(out);
        }
        Ok(ForwardCache {
            inputs: inputs.iter().map(|x| x.to_vec()).collect(),
            branch_pre,
            branch_out,
            concat,
            trunk_pre,
            trunk_out,
        })
    }

    /// Exact reverse-mode gradients of `upstream . output` with respect to
    /// every parameter and every input branch.
    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<Gradients> {
        let mut grads = Gradients::zeros_like(self);
        self.backward_into(cache, upstream, &mut grads)?;
        Ok(grads)
    }

    /// Batch-accumulation variant of [`DenseNetwork::backward`]: parameter
    /// gradients are added into `grads`, input gradients are overwritten.
    pub fn backward_into(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
        grads: &mut Gradients,
    ) -> Result<()> {
        if upstream.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                location: "upstream gradient".into(),
                expected: self.output_dim(),
                got: upstream.len(),
            });
        }
        let mut d_out = upstream.to_vec();
        for (idx, layer) in self.trunk.iter().enumerate().rev() {
            let input = if idx == 0 {
                &cache.concat
            } else {
                &cache.trunk_out[idx - 1]
            };
            let mut d_input = vec![0.0; layer.in_dim()];
            layer.backward(
                input,
                &cache.trunk_pre[idx],
                &cache.trunk_out[idx],
                &d_out,
                &mut grads.trunk[idx],
                &mut d_input,
            );
            d_out = d_input;
        }
        if self.branches.is_empty() {
            grads.inputs[0].copy_from_slice(&d_out);
        } else {
            let mut offset = 0;
            for (idx, layer) in self.branches.iter().enumerate() {
                let slice = &d_out[offset..offset + layer.out_dim()];
                let mut d_input = vec![0.0; layer.in_dim()];
                layer.backward(
                    &cache.inputs[idx],
                    &cache.branch_pre[idx],
                    &cache.branch_out[idx],
                    slice,
                    &mut grads.branches[idx],
                    &mut d_input,
                );
                grads.inputs[idx].copy_from_slice(&d_input);
                offset += layer.out_dim();
            }
        }
        Ok(())
    }

    /// Input gradients only, leaving the network's parameters out of it;
    /// the path a generator loss takes through a frozen discriminator.
    pub fn backward_inputs(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<Vec<Vec<f64>>> {
        if upstream.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                location: "upstream gradient".into(),
                expected: self.output_dim(),
                got: upstream.len(),
            });
        }
        let mut d_out = upstream.to_vec();
        for (idx, layer) in self.trunk.iter().enumerate().rev() {
            let mut d_input = vec![0.0; layer.in_dim()];
            layer.backward_input_only(&cache.trunk_pre[idx], &cache.trunk_out[idx], &d_out, &mut d_input);
            d_out = d_input;
        }
        if self.branches.is_empty() {
            return Ok(vec![d_out]);
        }
        let mut inputs = Vec::with_capacity(self.branches.len());
        let mut offset = 0;
        for (idx, layer) in self.branches.iter().enumerate() {
            let slice = &d_out[offset..offset + layer.out_dim()];
            let mut d_input = vec![0.0; layer.in_dim()];
            layer.backward_input_only(
                &cache.branch_pre[idx],
                &cache.branch_out[idx],
                slice,
                &mut d_input,
            );
            inputs.push(d_input);
            offset += layer.out_dim();
        }
        Ok(inputs)
    }
}
