//! Heterogeneous graph encoder for entity subgraphs.
//!
//! Each node type gets a linear input projection. Attention
//! message-passing layers then run over every FK relation and its
//! reversed twin. The root's final state is the parent signal, and
//! attention-pooled states of the other types, mapped per type and
//! summed, are the relational context. A sigmoid gate fuses the two as
//! `z_final = z_parent + g ⊙ tanh(W z_context + b)`.
//!
//! Training is self-supervised on synthetic entities only. Decoder heads
//! reconstruct the root's features and, per neighbouring type, the sum of
//! the root's neighbours' features.

mod batch;
mod forward;
mod model;
mod train;

use thiserror::Error;

use crate::diffcore::DiffError;

pub use forward::{
    attention_pool, encode_batch, encode_subgraph, initial_states, loss_and_gradients,
    message_pass, reconstruction_loss, EntityEmbedding,
};
pub use model::{
    EncoderCheckpoint, EncoderConfig, EncoderParams, Relation, SchemaLayout, CHECKPOINT_FORMAT,
};
pub use train::{train_encoder, LossHistory};

#[derive(Debug, Error)]
pub enum HgnnError {
    #[error("encoder configuration: {0}")]
    Config(String),
    #[error("subgraph belongs to a schema the encoder was not built for")]
    SchemaMismatch,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("non-finite loss {value} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize, value: f64 },
    #[error("non-finite gradient in {param} at epoch {epoch}, batch {batch}")]
    NonFiniteGradient {
        epoch: usize,
        batch: usize,
        param: String,
    },
    #[error(transparent)]
    Diff(#[from] DiffError),
}
