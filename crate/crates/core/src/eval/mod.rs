//! Error metrics on the rating component, direction and percent-change
//! prediction, title bands, and the with/without-practice ablation.

mod ablation;
mod metrics;
mod report;
mod title;

use thiserror::Error;

use crate::dataset::{DatasetError, FeatureMode, FeatureScaler, SequenceSample, TimestampFeatures};
use crate::models::{Model, ModelError, ModelKind, SeqBatch};
use crate::nncore::Matrix;
use crate::train::{predict_samples, TrainError};

pub use ablation::{median_mae, run_ablation, AblationConfig, AblationResult};
pub use metrics::{direction_accuracy, mae, mse, percent_change, r2, rmse, Direction};
pub use report::{report_csv, report_table, REPORT_CSV_HEADER};
pub use title::{rating_to_title, RatingTitle};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no samples to evaluate")]
    EmptyInput,
    #[error("observed values are constant, R² is undefined")]
    DegenerateVariance,
    #[error("previous rating is zero, percent change is undefined")]
    ZeroBase,
    #[error("insufficient history (need {need} contests, have {have})")]
    InsufficientHistory { need: usize, have: usize },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Test-set metrics for one trained model, in rating units.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub model: ModelKind,
    pub feature_mode: FeatureMode,
    pub rmse: f64,
    pub mse: f64,
    pub mae: f64,
    pub r2: f64,
    pub direction_accuracy: f64,
    pub n_test: usize,
    pub seed: u64,
}

/// Evaluates `model` on scaled `samples`, comparing inverse-scaled ratings.
pub fn evaluate(
    model: &Model,
    samples: &[SequenceSample],
    scaler: &FeatureScaler,
    feature_mode: FeatureMode,
    seed: u64,
) -> Result<MetricsReport, EvalError> {
    if samples.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let preds = predict_samples(model, samples)?;
    let pred: Vec<f64> = preds.iter().map(|p| scaler.unscale_value(0, p[0])).collect();
    let actual: Vec<f64> = samples.iter().map(|s| scaler.unscale_value(0, s.target[0])).collect();
    let prev: Vec<f64> = samples.iter().map(|s| s.target_prev_rating).collect();
    let mse_v = mse(&actual, &pred)?;
    Ok(MetricsReport {
        model: model.kind(),
        feature_mode,
        rmse: mse_v.sqrt(),
        mse: mse_v,
        mae: mae(&actual, &pred)?,
        r2: r2(&actual, &pred)?,
        direction_accuracy: direction_accuracy(&pred, &prev, &actual)?,
        n_test: samples.len(),
        seed,
    })
}

/// Next-contest forecast for one contestant.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub current_rating: f64,
    /// Unrounded model output in rating units.
    pub raw_rating: f64,
    pub predicted_rating: i64,
    pub direction: Direction,
    pub percent_change: f64,
    pub title: RatingTitle,
}

/// Forecasts the contest after the last entry of `timeline` from its most
/// recent `seq_len` entries.
pub fn predict_next(
    model: &Model,
    scaler: &FeatureScaler,
    timeline: &[TimestampFeatures],
    mode: FeatureMode,
) -> Result<Prediction, EvalError> {
    let need = model.config().seq_len;
    if timeline.len() < need {
        return Err(EvalError::InsufficientHistory { need, have: timeline.len() });
    }
    let rows: Vec<Vec<f64>> = timeline[timeline.len() - need..].iter().map(|t| scaler.transform(&t.features(mode))).collect();
    let inputs = Matrix::from_rows(&rows);
    if inputs.cols() != model.config().input_features {
        return Err(ModelError::ShapeMismatch {
            expected: format!("{} features", model.config().input_features),
            found: format!("{} features ({mode} mode)", inputs.cols()),
        }
        .into());
    }
    let out = model.predict(&SeqBatch::single(&inputs))?;
    let raw = scaler.unscale_value(0, out.get(0, 0));
    let current = timeline.last().expect("nonempty").rating;
    let predicted = raw.round() as i64;
    Ok(Prediction {
        current_rating: current,
        raw_rating: raw,
        predicted_rating: predicted,
        direction: Direction::of_change(current, predicted as f64),
        percent_change: percent_change(predicted as f64, current)?,
        title: rating_to_title(predicted),
    })
}
