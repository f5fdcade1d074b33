//! Recurrent sequence-to-vector regressors with hand-written backward passes.
//!
//! Four variants share one layout: a stack of recurrent layers, each followed
//! by dropout, an optional attention block over the top layer's states, then a
//! ReLU dense layer and a linear output with one unit per feature.

mod attention;
mod checkpoint;
mod config;
mod dense;
mod model;
mod recurrent;


use thiserror::Error;

use crate::dataset::SequenceSample;
use crate::nncore::{Matrix, NnError};

pub use attention::Attention;
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, ModelCheckpoint, Provenance, SelectionRule};
pub use config::{ModelConfig, ModelKind};
pub use dense::Dense;
pub use model::{DropoutMasks, ForwardMode, Model, Tape};
pub use recurrent::{BiLstmLayer, GruLayer, LstmLayer, RecurrentLayer};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("tape was recorded before the parameters last changed")]
    StaleTape,
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported checkpoint: {0}")]
    FormatVersionMismatch(String),
    #[error("checkpoint payload has {found} values, the architecture needs {expected}")]
    PayloadLengthMismatch { expected: usize, found: usize },
}

/// A batch of equal-length sequences in time-major layout: row `t·batch + b`
/// of `data` is step `t` of item `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeqBatch {
    pub steps: usize,
    pub batch: usize,
    pub data: Matrix,
}

impl SeqBatch {
    pub fn from_samples(samples: &[&SequenceSample]) -> Result<Self, ModelError> {
        let first = samples.first().ok_or_else(|| ModelError::ShapeMismatch {
            expected: "at least one sample".into(),
            found: "empty batch".into(),
        })?;
        let (steps, f) = first.inputs.shape();
        let batch = samples.len();
        let mut data = Matrix::zeros(steps * batch, f);
        for (b, s) in samples.iter().enumerate() {
            if s.inputs.shape() != (steps, f) {
                return Err(ModelError::ShapeMismatch {
                    expected: format!("{steps} x {f}"),
                    found: format!("{:?}", s.inputs.shape()),
                });
            }
            for t in 0..steps {
                data.row_mut(t * batch + b).copy_from_slice(s.inputs.row(t));
            }
        }
        Ok(Self { steps, batch, data })
    }

    /// One sequence given as a `T × F` matrix.
    pub fn single(inputs: &Matrix) -> Self {
        Self { steps: inputs.rows(), batch: 1, data: inputs.clone() }
    }
}

/// Targets of `samples` stacked as a `B × F` matrix.
pub fn targets_matrix(samples: &[&SequenceSample]) -> Matrix {
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.target.clone()).collect();
    Matrix::from_rows(&rows)
}
