//! Dense float64 matrices with a reverse-mode tape, an Adam optimizer and
//! a finite-difference gradient checker.
//!
//! The primitive set is exactly what the graph encoder needs: matmul,
//! broadcast add, broadcast elementwise product, scaling, column concat,
//! row gather, segment sum, sigmoid, tanh, leaky relu, segment softmax
//! and squared error.

mod gradcheck;
mod optim;
mod params;
mod tape;
mod tensor;

use thiserror::Error;

pub use gradcheck::{grad_check, relative_error, Coordinates};
pub use optim::{adam_step, AdamConfig, AdamState};
pub use params::{glorot_uniform, NamedTensor, ParamId, ParamStore};
pub use tape::{Gradients, Tape, Var};
pub use tensor::{
    add, concat_cols, gather_rows, leaky_relu, matmul, mul, segment_softmax, segment_sum,
    sigmoid, sigmoid_scalar, tanh, Tensor, SIGMOID_CLAMP,
};

#[derive(Debug, Error)]
pub enum DiffError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("loss must be a 1x1 tensor, got {0:?}")]
    NonScalarLoss((usize, usize)),
    #[error("non-finite gradient {value} in parameter {param} at flat index {index}")]
    NonFiniteGradient {
        param: String,
        index: usize,
        value: f64,
    },
    #[error("parameter snapshot: {0}")]
    Snapshot(String),
}
