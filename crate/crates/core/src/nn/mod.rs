//! Minimal training stack used to compare activations at desk scale.

pub mod adam;
pub mod data;
pub mod loss;
pub mod metrics;
pub mod mlp;
pub mod tasks;
pub mod train;

pub use adam::{Adam, TrainConfig};
pub use mlp::{MlpGrads, MlpModel};
