//! KDAC: a smoothed composition of `max`/`min` over `tanh` and two
//! trainable linear maps, with exact gradients, the comparison activations
//! it is usually benchmarked against, and a small training harness.
//!
//! * [`smooth`]: clamped quadratic blends (smoothed min/max) and their partials
//! * [`kdac`]: the activation, its gradients, tensor broadcasting, breakpoint analysis
//! * [`activations`]: the nine scalar activations behind [`ActivationKind`]
//! * [`nn`]: tensors, an MLP with backprop, Adam, losses, span metrics, synthetic tasks
//! * [`commands`]: the `kdac-kit` subcommands: gradient checks, curves, benches, timing

pub mod activations;
pub mod commands;
pub mod error;
pub mod fdcheck;
pub mod kdac;
pub mod nn;
pub mod numfmt;
pub mod roots;
pub mod smooth;
pub mod tensor;

pub use activations::{eval_activation, eval_activation_derivative, list_registry, ActivationKind};
pub use error::{Error, Result};
pub use kdac::{kdac_backward, kdac_scalar, KdacGradients, KdacParams};
pub use tensor::Tensor;
