//! Binary checkpoint: architecture, scaler, provenance, then the flat weights.
//!
//! ```text
//! "CFCKPT01" u32 version
//! config   u8 kind, u32 layers, u32 hidden, f64 dropout, u32 dense_hidden,
//!          u32 inputs, u32 outputs, u32 seq_len, u64 init_seed
//! scaler   u32 F, F×f64 min, F×f64 max
//! origin   u32 epochs, f64 best_val_mae, [u8; 32] dataset hash,
//!          u64 init_seed, u64 shuffle_seed, u64 split_seed, u8 selection
//! weights  u64 count, count×f64
//! ```
//! All integers and floats are little-endian.

use std::io;
use std::path::Path;

use super::{Model, ModelConfig, ModelError, ModelKind};
use crate::binio::{write_atomic, ByteReader, ByteWriter};
use crate::dataset::FeatureScaler;

const MAGIC: &[u8; 8] = b"CFCKPT01";
const VERSION: u32 = 1;

/// Which score picked the saved weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionRule {
    /// Lowest loss on a validation split carved from the training data.
    Validation,
    /// Lowest loss on the test split, as in the original experiments. Leaks test data.
    TestMimic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub epochs_run: u32,
    pub best_val_mae: f64,
    pub dataset_hash: [u8; 32],
    pub init_seed: u64,
    pub shuffle_seed: u64,
    pub split_seed: u64,
    pub selection: SelectionRule,
}

#[derive(Clone, Debug)]
pub struct ModelCheckpoint {
    pub model: Model,
    pub scaler: FeatureScaler,
    pub provenance: Provenance,
}

pub fn encode_checkpoint(ckpt: &ModelCheckpoint) -> Vec<u8> {
    let mut w = ByteWriter::new();
    w.bytes(MAGIC);
    w.u32(VERSION);
    let c = ckpt.model.config();
    w.u8(c.kind.code());
    w.u32(c.n_layers as u32);
    w.u32(c.hidden as u32);
    w.f64(c.dropout);
    w.u32(c.dense_hidden as u32);
    w.u32(c.input_features as u32);
    w.u32(c.output_features as u32);
    w.u32(c.seq_len as u32);
    w.u64(c.init_seed);

    w.u32(ckpt.scaler.min.len() as u32);
    w.f64s(&ckpt.scaler.min);
    w.f64s(&ckpt.scaler.max);

    let p = &ckpt.provenance;
    w.u32(p.epochs_run);
    w.f64(p.best_val_mae);
    w.bytes(&p.dataset_hash);
    w.u64(p.init_seed);
    w.u64(p.shuffle_seed);
    w.u64(p.split_seed);
    w.u8(match p.selection {
        SelectionRule::Validation => 0,
        SelectionRule::TestMimic => 1,
    });

    let flat = ckpt.model.flatten_params();
    w.u64(flat.len() as u64);
    w.f64s(&flat);
    w.finish()
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<ModelCheckpoint, ModelError> {
    let mut r = ByteReader::new(bytes);
    let magic = r.take(8)?;
    if magic != MAGIC {
        return Err(ModelError::FormatVersionMismatch(format!("bad magic {:?}", String::from_utf8_lossy(magic))));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(ModelError::FormatVersionMismatch(format!("version {version}, this build reads {VERSION}")));
    }
    let kind_code = r.u8()?;
    let kind = ModelKind::from_code(kind_code)
        .ok_or_else(|| ModelError::FormatVersionMismatch(format!("unknown model kind {kind_code}")))?;
    let config = ModelConfig {
        kind,
        n_layers: r.u32()? as usize,
        hidden: r.u32()? as usize,
        dropout: r.f64()?,
        dense_hidden: r.u32()? as usize,
        input_features: r.u32()? as usize,
        output_features: r.u32()? as usize,
        seq_len: r.u32()? as usize,
        init_seed: r.u64()?,
    };

    let f = r.u32()? as usize;
    let min = r.f64s(f)?;
    let max = r.f64s(f)?;
    let scaler = FeatureScaler { min, max };

    let epochs_run = r.u32()?;
    let best_val_mae = r.f64()?;
    let mut dataset_hash = [0u8; 32];
    dataset_hash.copy_from_slice(r.take(32)?);
    let init_seed = r.u64()?;
    let shuffle_seed = r.u64()?;
    let split_seed = r.u64()?;
    let selection = match r.u8()? {
        0 => SelectionRule::Validation,
        1 => SelectionRule::TestMimic,
        other => return Err(ModelError::FormatVersionMismatch(format!("unknown selection rule {other}"))),
    };
    let provenance = Provenance { epochs_run, best_val_mae, dataset_hash, init_seed, shuffle_seed, split_seed, selection };

    config.validate()?;
    let count = r.u64()? as usize;
    let expected = config.parameter_count();
    if count != expected {
        return Err(ModelError::PayloadLengthMismatch { expected, found: count });
    }
    if r.remaining() != count * 8 {
        return Err(ModelError::PayloadLengthMismatch { expected, found: r.remaining() / 8 });
    }
    let flat = r.f64s(count)?;
    let mut model = Model::new(config)?;
    model.load_flat(&flat)?;
    Ok(ModelCheckpoint { model, scaler, provenance })
}

pub fn save_checkpoint(ckpt: &ModelCheckpoint, path: &Path) -> Result<(), ModelError> {
    write_atomic(path, &encode_checkpoint(ckpt))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelCheckpoint, ModelError> {
    let bytes = std::fs::read(path)?;
    decode_checkpoint(&bytes).map_err(|e| match e {
        ModelError::Io(inner) if inner.kind() == io::ErrorKind::UnexpectedEof => {
            ModelError::Io(io::Error::new(io::ErrorKind::UnexpectedEof, format!("{}: truncated checkpoint", path.display())))
        }
        other => other,
    })
}
