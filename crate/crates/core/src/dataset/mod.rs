//! From raw contest history to scaled fixed-length training sequences.

mod format;
mod scaler;
mod sequences;
mod split;
mod synthetic;
mod timeline;

pub use format::{dataset_hash, decode_dataset, encode_dataset, load_dataset, save_dataset, DATASET_MAGIC};
pub use scaler::{apply_scaler, fit_scaler, invert_scaler, FeatureScaler};
pub use sequences::{make_sequences, SequenceSample, DEFAULT_WINDOW};
pub use split::{split_dataset, DEFAULT_SPLIT_RATIO};
pub use synthetic::{generate_synthetic_timelines, SyntheticConfig};
pub use timeline::{
    build_timeline, practice_counts, read_timeline_csv, write_timeline_csv, TimestampFeatures, CONTEST_START_FALLBACK_SECS,
    TIMELINE_CSV_HEADER,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("rating changes out of order at contest {contest_id} (time {time})")]
    NonChronologicalInput { contest_id: u64, time: i64 },
    #[error("window must be at least 2, got {0}")]
    InvalidWindow(usize),
    #[error("split ratio must lie in (0, 1), got {0}")]
    InvalidRatio(f64),
    #[error("cannot fit a scaler on an empty training set")]
    EmptyTrainingSet,
    #[error("unsupported dataset file: {0}")]
    FormatVersionMismatch(String),
    #[error("timeline csv line {line}: {detail}")]
    BadTimelineCsv { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which feature groups each timestamp carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureMode {
    /// rating, rank, solve rating
    Base,
    /// base features plus practice AC and WA counts
    WithPractice,
}

impl FeatureMode {
    pub fn feature_count(self) -> usize {
        match self {
            FeatureMode::Base => 3,
            FeatureMode::WithPractice => 5,
        }
    }

    pub fn from_feature_count(f: usize) -> Option<Self> {
        match f {
            3 => Some(FeatureMode::Base),
            5 => Some(FeatureMode::WithPractice),
            _ => None,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            FeatureMode::Base => 0,
            FeatureMode::WithPractice => 1,
        }
    }

    pub(crate) fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(FeatureMode::Base),
            1 => Some(FeatureMode::WithPractice),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Base => "base",
            FeatureMode::WithPractice => "practice",
        }
    }
}

impl std::str::FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "base" => Ok(FeatureMode::Base),
            "practice" | "with-practice" | "with_practice" => Ok(FeatureMode::WithPractice),
            other => Err(format!("unknown feature mode {other:?} (expected base or practice)")),
        }
    }
}

impl std::fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Scaled train/test sequences plus everything needed to undo the scaling.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetBundle {
    pub train: Vec<SequenceSample>,
    pub test: Vec<SequenceSample>,
    pub scaler: FeatureScaler,
    pub feature_mode: FeatureMode,
    pub split_seed: u64,
    /// Input rows per sample.
    pub steps: usize,
}

/// Splits raw samples, fits the scaler on the train side only and scales both sides.
pub fn build_bundle(
    samples: Vec<SequenceSample>,
    feature_mode: FeatureMode,
    ratio: f64,
    split_seed: u64,
    by_user: bool,
) -> Result<DatasetBundle, DatasetError> {
    let steps = samples.first().map_or(DEFAULT_WINDOW - 1, SequenceSample::steps);
    let (train, test) = split_dataset(samples, ratio, split_seed, by_user)?;
    let scaler = fit_scaler(&train)?;
    Ok(DatasetBundle {
        train: scaler.apply(&train),
        test: scaler.apply(&test),
        scaler,
        feature_mode,
        split_seed,
        steps,
    })
}

/// Sequences from several contestants' timelines; the tag is the timeline's index.
pub fn sequences_from_timelines(
    timelines: &[Vec<TimestampFeatures>],
    window: usize,
    mode: FeatureMode,
) -> Result<Vec<SequenceSample>, DatasetError> {
    let mut out = Vec::new();
    for (tag, tl) in timelines.iter().enumerate() {
        out.extend(make_sequences(tl, window, mode, tag as u64)?);
    }
    Ok(out)
}
