use super::{DatasetError, FeatureMode, TimestampFeatures};
use crate::nncore::Matrix;

/// Paper-default window: 15 input timestamps plus one target.
pub const DEFAULT_WINDOW: usize = 16;

/// `window - 1` consecutive timestamps and the one that follows.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceSample {
    /// `(window - 1) × F`
    pub inputs: Matrix,
    /// Length `F`.
    pub target: Vec<f64>,
    pub contestant_tag: u64,
    /// Unscaled rating at the last input timestamp.
    pub target_prev_rating: f64,
}

impl SequenceSample {
    pub fn steps(&self) -> usize {
        self.inputs.rows()
    }

    pub fn features(&self) -> usize {
        self.inputs.cols()
    }
}

/// Stride-1 sliding windows: `max(0, L - window + 1)` samples.
pub fn make_sequences(
    timeline: &[TimestampFeatures],
    window: usize,
    mode: FeatureMode,
    contestant_tag: u64,
) -> Result<Vec<SequenceSample>, DatasetError> {
    if window < 2 {
        return Err(DatasetError::InvalidWindow(window));
    }
    let rows: Vec<Vec<f64>> = timeline.iter().map(|t| t.features(mode)).collect();
    Ok(rows
        .windows(window)
        .zip(timeline.windows(window))
        .map(|(w, ts)| SequenceSample {
            inputs: Matrix::from_rows(&w[..window - 1]),
            target: w[window - 1].clone(),
            contestant_tag,
            target_prev_rating: ts[window - 2].rating,
        })
        .collect())
}
