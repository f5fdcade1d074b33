//! Mini-batch training with MAE loss and Adam, keeping the weights with the
//! lowest validation error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::dataset::{dataset_hash, DatasetBundle, FeatureScaler, SequenceSample};
use crate::models::{
    save_checkpoint, targets_matrix, ForwardMode, Model, ModelCheckpoint, ModelError, Provenance, SelectionRule, SeqBatch,
};
use crate::nncore::{mae_loss, AdamConfig, Rng};

pub const HISTORY_CSV_HEADER: &str = "epoch,train_mae_scaled,val_mae_raw,ms";

const VAL_SPLIT_TAG: u64 = 0x7641_4c53;
const DROPOUT_TAG: u64 = 0x4452_4f50;
const EVAL_CHUNK: usize = 256;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("{0} set is empty")]
    EmptyDataset(&'static str),
    #[error("model does not fit the dataset: {0}")]
    ConfigMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("history log: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub shuffle_seed: u64,
    pub val_fraction: f64,
    pub checkpoint_path: Option<PathBuf>,
    pub history_path: Option<PathBuf>,
    /// Select on the test split instead of a held-out validation split.
    /// Mirrors the original protocol and leaks test data into model selection.
    pub mimic_paper_checkpointing: bool,
    /// Global gradient-norm clip; off by default (5.0 is a reasonable value for deep stacks).
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            batch_size: 256,
            adam: AdamConfig::default(),
            shuffle_seed: 0,
            val_fraction: 0.1,
            checkpoint_path: None,
            history_path: None,
            mimic_paper_checkpointing: false,
            clip_norm: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_string()));
        if self.epochs < 1 {
            return bad("epochs must be >= 1");
        }
        if self.batch_size < 1 {
            return bad("batch_size must be >= 1");
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return bad("val_fraction must lie in [0, 1)");
        }
        if !(self.adam.lr > 0.0) {
            return bad("learning rate must be positive");
        }
        if matches!(self.clip_norm, Some(c) if !(c > 0.0)) {
            return bad("clip norm must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mae_scaled: f64,
    pub val_mae_raw: f64,
    pub ms: u64,
}

impl EpochRecord {
    pub fn csv_line(&self) -> String {
        format!("{},{},{},{}", self.epoch, self.train_mae_scaled, self.val_mae_raw, self.ms)
    }
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub checkpoint: ModelCheckpoint,
    pub history: Vec<EpochRecord>,
    /// Epoch whose weights were kept.
    pub best_epoch: usize,
    pub optimizer_steps: u64,
}

/// What the trainer may read. Keeping test access behind its own method lets
/// callers verify that selection never touches it.
pub trait TrainData {
    fn train_samples(&self) -> &[SequenceSample];
    fn test_samples(&self) -> &[SequenceSample];
    fn scaler(&self) -> &FeatureScaler;
    fn split_seed(&self) -> u64;
    fn content_hash(&self) -> [u8; 32];
}

impl TrainData for DatasetBundle {
    fn train_samples(&self) -> &[SequenceSample] {
        &self.train
    }

    fn test_samples(&self) -> &[SequenceSample] {
        &self.test
    }

    fn scaler(&self) -> &FeatureScaler {
        &self.scaler
    }

    fn split_seed(&self) -> u64 {
        self.split_seed
    }

    fn content_hash(&self) -> [u8; 32] {
        dataset_hash(self)
    }
}

/// Eval-mode predictions for `samples`, `N × F`, in scaled space.
pub fn predict_samples(model: &Model, samples: &[SequenceSample]) -> Result<Vec<Vec<f64>>, ModelError> {
    let mut out = Vec::with_capacity(samples.len());
    for chunk in samples.chunks(EVAL_CHUNK) {
        let refs: Vec<&SequenceSample> = chunk.iter().collect();
        let pred = model.predict(&SeqBatch::from_samples(&refs)?)?;
        for b in 0..pred.rows() {
            out.push(pred.row(b).to_vec());
        }
    }
    Ok(out)
}

/// Mean absolute error of the rating component in raw rating units.
pub fn rating_mae(predictions: &[Vec<f64>], samples: &[SequenceSample], scaler: &FeatureScaler) -> f64 {
    let total: f64 = predictions
        .iter()
        .zip(samples)
        .map(|(p, s)| (scaler.unscale_value(0, p[0]) - scaler.unscale_value(0, s.target[0])).abs())
        .sum();
    total / samples.len() as f64
}

/// Validation MAE on the rating component, in rating units.
pub fn validate(model: &Model, samples: &[SequenceSample], scaler: &FeatureScaler) -> Result<f64, TrainError> {
    if samples.is_empty() {
        return Err(TrainError::EmptyDataset("validation"));
    }
    let preds = predict_samples(model, samples)?;
    Ok(rating_mae(&preds, samples, scaler))
}

fn check_fit(model: &Model, samples: &[SequenceSample], scaler: &FeatureScaler) -> Result<(), TrainError> {
    let c = model.config();
    let s = &samples[0];
    if s.features() != c.input_features || s.target.len() != c.output_features || scaler.features() != c.input_features {
        return Err(TrainError::ConfigMismatch(format!(
            "model expects {} input and {} output features, dataset has {}",
            c.input_features,
            c.output_features,
            s.features()
        )));
    }
    if s.steps() != c.seq_len {
        return Err(TrainError::ConfigMismatch(format!("model window {} vs dataset window {}", c.seq_len, s.steps())));
    }
    Ok(())
}

/// Splits the training indices into (fit, validation). With no room for a
/// validation split the whole training set doubles as validation.
fn carve_validation(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let n_val = ((fraction * n as f64).round() as usize).min(n.saturating_sub(1));
    if n_val == 0 {
        return (idx.clone(), idx);
    }
    Rng::derived(seed, VAL_SPLIT_TAG).shuffle(&mut idx);
    let val = idx.split_off(n - n_val);
    (idx, val)
}

pub fn train<D: TrainData + ?Sized>(model: &mut Model, data: &D, cfg: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    let all_train = data.train_samples();
    if all_train.is_empty() {
        return Err(TrainError::EmptyDataset("training"));
    }
    let scaler = data.scaler().clone();
    check_fit(model, all_train, &scaler)?;

    let (fit_idx, selection_set): (Vec<usize>, Vec<SequenceSample>) = if cfg.mimic_paper_checkpointing {
        let test = data.test_samples();
        if test.is_empty() {
            return Err(TrainError::EmptyDataset("test"));
        }
        ((0..all_train.len()).collect(), test.to_vec())
    } else {
        let (fit, val) = carve_validation(all_train.len(), cfg.val_fraction, cfg.shuffle_seed);
        let val = val.iter().map(|&i| all_train[i].clone()).collect();
        (fit, val)
    };

    let mut history_out = match &cfg.history_path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            writeln!(w, "{HISTORY_CSV_HEADER}")?;
            w.flush()?;
            Some(w)
        }
        None => None,
    };

    let hash = data.content_hash();
    let mut dropout_rng = Rng::derived(cfg.shuffle_seed, DROPOUT_TAG);
    let mut step: u64 = 0;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, Model)> = None;

    for epoch in 1..=cfg.epochs {
        let started = Instant::now();
        let mut order = fit_idx.clone();
        Rng::new(cfg.shuffle_seed ^ epoch as u64).shuffle(&mut order);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let refs: Vec<&SequenceSample> = chunk.iter().map(|&i| &all_train[i]).collect();
            let batch = SeqBatch::from_samples(&refs)?;
            let target = targets_matrix(&refs);
            let (pred, tape) = model.forward(&batch, ForwardMode::Train(&mut dropout_rng))?;
            let (loss, grad) = mae_loss(&pred, &target).map_err(ModelError::from)?;
            model.backward(tape, &grad)?;
            step += 1;
            model.adam_step(&cfg.adam, step, cfg.clip_norm);
            loss_sum += loss * chunk.len() as f64;
        }
        let train_mae = loss_sum / order.len() as f64;
        let val_mae = validate(model, &selection_set, &scaler)?;
        let improved = match &best {
            None => true,
            Some((b, _, _)) => val_mae < *b,
        };
        if improved {
            best = Some((val_mae, epoch, model.clone()));
        }
        let record = EpochRecord {
            epoch,
            train_mae_scaled: train_mae,
            val_mae_raw: val_mae,
            ms: started.elapsed().as_millis() as u64,
        };
        log::debug!("epoch {epoch}: train {train_mae:.6} val {val_mae:.3}{}", if improved { " *" } else { "" });
        if let Some(w) = history_out.as_mut() {
            writeln!(w, "{}", record.csv_line())?;
            w.flush()?;
        }
        history.push(record);
        if improved {
            if let Some(path) = &cfg.checkpoint_path {
                let (v, _, m) = best.as_ref().expect("just set");
                save_checkpoint(&make_checkpoint(m, &scaler, hash, data.split_seed(), cfg, epoch, *v), path)?;
            }
        }
    }

    let (best_val, best_epoch, best_model) = best.expect("epochs >= 1");
    let checkpoint = make_checkpoint(&best_model, &scaler, hash, data.split_seed(), cfg, cfg.epochs, best_val);
    if let Some(path) = &cfg.checkpoint_path {
        save_checkpoint(&checkpoint, path)?;
    }
    Ok(TrainOutcome { checkpoint, history, best_epoch, optimizer_steps: step })
}

fn make_checkpoint(
    model: &Model,
    scaler: &FeatureScaler,
    dataset_hash: [u8; 32],
    split_seed: u64,
    cfg: &TrainConfig,
    epochs_run: usize,
    best_val_mae: f64,
) -> ModelCheckpoint {
    ModelCheckpoint {
        model: model.clone(),
        scaler: scaler.clone(),
        provenance: Provenance {
            epochs_run: epochs_run as u32,
            best_val_mae,
            dataset_hash,
            init_seed: model.config().init_seed,
            shuffle_seed: cfg.shuffle_seed,
            split_seed,
            selection: if cfg.mimic_paper_checkpointing { SelectionRule::TestMimic } else { SelectionRule::Validation },
        },
    }
}
