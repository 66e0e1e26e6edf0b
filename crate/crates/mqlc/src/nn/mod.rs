//! Minimal differentiable-computation core.
//!
//! Dense 64-bit tensors, a reverse-mode tape ([`Graph`]), the layer kinds the
//! decision and intent networks need (fully connected, graph convolution,
//! gated recurrent cell), Adam, finite-difference gradient checking and a
//! binary checkpoint format.

mod adam;
mod adjacency;
mod checkpoint;
mod gradcheck;
mod layers;
mod params;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamState};
pub use adjacency::AdjacencyMatrix;
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta, CHECKPOINT_VERSION};
pub use gradcheck::{grad_check, GradCheckReport};
pub use layers::{fc_forward, gcn_forward, gru_forward, mse, softmax, Activation, GruVars};
pub use params::{copy_into, BoundParams, ParamInit, ParameterSet};
pub use tape::{Graph, Var};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
    #[error("graph already consumed by backward")]
    GraphConsumed,
    #[error("backward requires a scalar loss, got {rows}x{cols}")]
    NonScalarLoss { rows: usize, cols: usize },
    #[error("unknown parameter {0}")]
    UnknownParameter(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
