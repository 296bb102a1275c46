//! Minimal dense feed-forward engine: the four activations used by the
//! generator/discriminator stacks, exact reverse-mode gradients, binary
//! cross entropy, Adam with inverse-time learning-rate decay, a
//! finite-difference gradient checker, and flat text serialization.
//!
//! Networks are plain values: forward/backward never mutate them, so a
//! trained network can be shared read-only across threads. Training mutates
//! parameters through [`adam_step`] and must be serialized externally.

pub mod activation;
pub mod adam;
pub mod gradcheck;
pub mod layer;
pub mod loss;
pub mod serialize;

mod network;

pub use activation::Activation;
pub use adam::{adam_step, AdamState};
pub use gradcheck::{fd_relative_error, gradient_check};
pub use layer::{DenseLayer, LayerGrad};
pub use loss::{bce_grad, bce_loss, EPS_CLAMP};
pub use network::{DenseNetwork, ForwardCache, Gradients};
pub use serialize::{network_from_str, network_to_string};
