//! Learning with class-conditional label noise.
//!
//! * [`noise`]: transition matrices, noisy-label sampling.
//! * [`correction`]: cross-entropy and the backward-corrected loss `T⁻¹ℓ`.
//! * [`estimator`]: anchor-point estimation of `T` from noisy posteriors.
//! * [`nn`]: a small CNN core with hand-written backpropagation.
//! * [`data`], [`metrics`], [`harness`]: datasets, evaluation and the
//!   repeated-run experiment protocol.

pub mod correction;
pub mod data;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod nn;
pub mod noise;
pub mod rng;

pub use correction::{backward_correct, ce_loss_vector, corrected_loss_grad, loss_for_label, Correction, LossVector};
pub use data::{LabelKind, LabeledDataset, SplitPlan, SyntheticSpec};
pub use error::{Error, Result};
pub use estimator::{estimate_transition, estimation_error, max_abs_error, ErrorMatrix, PosteriorBatch};
pub use linalg::{invert, matvec, softmax, Matrix, ProbVector};
pub use metrics::{aggregate, top1_accuracy, AggregateResult, RunResult};
pub use nn::{Network, OptimizerConfig, Preset, Tensor};
pub use noise::{flip_rate, inject_noise, noisy_posterior, FlipRate, TransitionMatrix};
