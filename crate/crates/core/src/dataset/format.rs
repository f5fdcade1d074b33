//! `CFSEQ001` dataset files.
//!
//! ```text
//! magic            8 bytes  "CFSEQ001"
//! feature_mode     u8       0 = base, 1 = with practice
//! features (F)     u32
//! steps            u32      input rows per sample (window - 1)
//! split_seed       u64
//! n_train, n_test  u64, u64
//! scaler           F × f64 min, then F × f64 max
//! samples          n_train then n_test records:
//!                    u64 contestant tag, f64 previous rating,
//!                    steps·F × f64 inputs (row-major), F × f64 target
//! ```
//! All integers and floats little-endian; nothing may follow the last record.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::{DatasetBundle, DatasetError, FeatureMode, FeatureScaler, SequenceSample};
use crate::binio::{write_atomic, ByteReader, ByteWriter};
use crate::nncore::Matrix;

pub const DATASET_MAGIC: &[u8; 8] = b"CFSEQ001";

pub fn encode_dataset(bundle: &DatasetBundle) -> Vec<u8> {
    let f = bundle.feature_mode.feature_count();
    let mut w = ByteWriter::new();
    w.bytes(DATASET_MAGIC);
    w.u8(bundle.feature_mode.code());
    w.u32(f as u32);
    w.u32(bundle.steps as u32);
    w.u64(bundle.split_seed);
    w.u64(bundle.train.len() as u64);
    w.u64(bundle.test.len() as u64);
    w.f64s(&bundle.scaler.min);
    w.f64s(&bundle.scaler.max);
    for s in bundle.train.iter().chain(&bundle.test) {
        w.u64(s.contestant_tag);
        w.f64(s.target_prev_rating);
        w.f64s(s.inputs.data());
        w.f64s(&s.target);
    }
    w.finish()
}

fn mismatch(msg: impl Into<String>) -> DatasetError {
    DatasetError::FormatVersionMismatch(msg.into())
}

pub fn decode_dataset(bytes: &[u8]) -> Result<DatasetBundle, DatasetError> {
    let mut r = ByteReader::new(bytes);
    if r.take(8)? != DATASET_MAGIC {
        return Err(mismatch("bad magic"));
    }
    let feature_mode = FeatureMode::from_code(r.u8()?).ok_or_else(|| mismatch("unknown feature mode"))?;
    let f = r.u32()? as usize;
    if f != feature_mode.feature_count() {
        return Err(mismatch(format!("feature count {f} does not match mode {feature_mode:?}")));
    }
    let steps = r.u32()? as usize;
    let split_seed = r.u64()?;
    let n_train = r.u64()? as usize;
    let n_test = r.u64()? as usize;
    let min = r.f64s(f)?;
    let max = r.f64s(f)?;
    let record = 16 + 8 * f * (steps + 1);
    let total = n_train.checked_add(n_test).and_then(|n| n.checked_mul(record));
    match total {
        Some(t) if t == r.remaining() => {}
        Some(t) if t > r.remaining() => {
            return Err(std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "truncated sample payload").into())
        }
        _ => return Err(mismatch("sample payload length does not match header")),
    }
    let read_sample = |r: &mut ByteReader| -> Result<SequenceSample, DatasetError> {
        let contestant_tag = r.u64()?;
        let target_prev_rating = r.f64()?;
        let inputs = Matrix::from_vec(steps, f, r.f64s(steps * f)?).expect("length checked");
        let target = r.f64s(f)?;
        Ok(SequenceSample { inputs, target, contestant_tag, target_prev_rating })
    };
    let train = (0..n_train).map(|_| read_sample(&mut r)).collect::<Result<Vec<_>, _>>()?;
    let test = (0..n_test).map(|_| read_sample(&mut r)).collect::<Result<Vec<_>, _>>()?;
    Ok(DatasetBundle { train, test, scaler: FeatureScaler { min, max }, feature_mode, split_seed, steps })
}

pub fn save_dataset(bundle: &DatasetBundle, path: &Path) -> Result<(), DatasetError> {
    write_atomic(path, &encode_dataset(bundle))?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<DatasetBundle, DatasetError> {
    decode_dataset(&std::fs::read(path)?)
}

/// SHA-256 of the encoded bundle.
pub fn dataset_hash(bundle: &DatasetBundle) -> [u8; 32] {
    Sha256::digest(encode_dataset(bundle)).into()
}
