//! Bidirectional GRU classifier with additive attention pooling, with a
//! hand-written backward pass.

mod checkpoint;
mod gru;
mod matrix;
mod model;
mod params;

pub use checkpoint::{Checkpoint, ResumeState, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gru::{direction_from_gates, gru_cell, GruStep};
pub use matrix::{log_softmax_at, sigmoid, softmax, Matrix};
pub use model::{
    argmax, forward, loss_and_grads, predict, sample_loss_and_grads, AttentionTrace, DirectionTrace,
    ForwardTrace, LayerTrace,
};
pub use params::{AttentionParams, GruDirectionParams, GruLayerParams, HeadInit, HeadParams, ModelConfig, ModelParams};
