//! Numeric building blocks: matrices, activations, the MAE loss, inverted
//! dropout, Adam, a seeded generator and a finite-difference gradient checker.
//!
//! Every layer built on top of this module implements its own explicit
//! backward pass; there is no autodiff graph.

mod activation;
mod dropout;
mod gradcheck;
mod loss;
mod matrix;
mod param;
mod rng;

pub use activation::{
    relu, relu_grad_from_output, sigmoid, sigmoid_grad_from_output, sigmoid_scalar, softmax_rows,
    softmax_rows_backward, tanh_act, tanh_grad_from_output,
};
pub(crate) use activation::softmax_in_place;
pub use dropout::{dropout_backward, dropout_forward};
pub(crate) use dropout::apply_mask;
pub use gradcheck::{grad_check, HasParams};
pub use loss::mae_loss;
pub use matrix::Matrix;
pub(crate) use matrix::{gemm_nn, gemm_nt, gemm_tn};
pub use param::{adam_step, clip_grad_norm, grad_norm, AdamConfig, Param};
pub use rng::{splitmix64, Rng};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("dropout rate must lie in [0, 1), got {0}")]
    InvalidRate(f64),
}
