//! Small differentiable network core: layers with hand-written backward
//! passes, SGD with momentum and weight decay, and a training loop.

pub mod checkpoint;
mod layer;
mod network;
mod presets;
mod tensor;
mod train;

pub use layer::{Activation, LayerSpec, BATCHNORM_EPS, BATCHNORM_MOMENTUM};
pub use network::{Gradients, Mode, Network, OptimizerConfig};
pub use presets::Preset;
pub use tensor::Tensor;
pub use train::{augment_flip, batch_objective, fit, posteriors, predict, TrainConfig, DEFAULT_FLIP_PROBABILITY};
