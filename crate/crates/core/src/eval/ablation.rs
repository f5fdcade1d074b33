use rayon::prelude::*;

use super::{evaluate, EvalError, MetricsReport};
use crate::dataset::{build_bundle, sequences_from_timelines, DatasetBundle, FeatureMode, TimestampFeatures, DEFAULT_WINDOW};
use crate::models::{Model, ModelConfig, ModelKind};
use crate::train::{train, TrainConfig};

#[derive(Clone, Debug)]
pub struct AblationConfig {
    pub kinds: Vec<ModelKind>,
    /// One training run per seed; the seed drives both initialisation and shuffling.
    pub seeds: Vec<u64>,
    pub window: usize,
    pub split_ratio: f64,
    pub split_seed: u64,
    pub by_user: bool,
    pub n_layers: usize,
    pub hidden: usize,
    pub dropout: f64,
    pub dense_hidden: usize,
    /// Template for every run; seeds and output paths are overridden per run.
    pub train: TrainConfig,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            kinds: ModelKind::ALL.to_vec(),
            seeds: vec![0],
            window: DEFAULT_WINDOW,
            split_ratio: 0.8,
            split_seed: 0,
            by_user: false,
            n_layers: 4,
            hidden: 256,
            dropout: 0.5,
            dense_hidden: 100,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationResult {
    pub base: Vec<MetricsReport>,
    pub practice: Vec<MetricsReport>,
}

impl AblationResult {
    pub fn for_mode(&self, mode: FeatureMode) -> &[MetricsReport] {
        match mode {
            FeatureMode::Base => &self.base,
            FeatureMode::WithPractice => &self.practice,
        }
    }
}

/// Median test MAE over the seeds run for `kind`.
pub fn median_mae(reports: &[MetricsReport], kind: ModelKind) -> Option<f64> {
    let mut v: Vec<f64> = reports.iter().filter(|r| r.model == kind).map(|r| r.mae).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

fn run_one(bundle: &DatasetBundle, kind: ModelKind, seed: u64, cfg: &AblationConfig) -> Result<MetricsReport, EvalError> {
    let features = bundle.feature_mode.feature_count();
    let mut model = Model::new(ModelConfig {
        kind,
        n_layers: cfg.n_layers,
        hidden: cfg.hidden,
        dropout: cfg.dropout,
        dense_hidden: cfg.dense_hidden,
        input_features: features,
        output_features: features,
        seq_len: cfg.window - 1,
        init_seed: seed,
    })?;
    let train_cfg = TrainConfig { shuffle_seed: seed, checkpoint_path: None, history_path: None, ..cfg.train.clone() };
    let outcome = train(&mut model, bundle, &train_cfg)?;
    log::info!("{} {} seed {seed}: best val MAE {:.3}", bundle.feature_mode, kind, outcome.checkpoint.provenance.best_val_mae);
    evaluate(&outcome.checkpoint.model, &bundle.test, &bundle.scaler, bundle.feature_mode, seed)
}

/// Trains every (kind, seed) pair in both feature modes on the same split
/// and reports test metrics. Runs execute in parallel; result order is
/// kinds × seeds as given.
pub fn run_ablation(timelines: &[Vec<TimestampFeatures>], cfg: &AblationConfig) -> Result<AblationResult, EvalError> {
    let mut bundles = Vec::with_capacity(2);
    for mode in [FeatureMode::Base, FeatureMode::WithPractice] {
        let samples = sequences_from_timelines(timelines, cfg.window, mode)?;
        bundles.push(build_bundle(samples, mode, cfg.split_ratio, cfg.split_seed, cfg.by_user)?);
    }
    let jobs: Vec<(usize, ModelKind, u64)> = (0..2)
        .flat_map(|m| cfg.kinds.iter().flat_map(move |&k| cfg.seeds.iter().map(move |&s| (m, k, s))))
        .collect();
    let results: Vec<Result<MetricsReport, EvalError>> =
        jobs.par_iter().map(|&(m, k, s)| run_one(&bundles[m], k, s, cfg)).collect();
    let mut base = Vec::new();
    let mut practice = Vec::new();
    for (&(m, _, _), r) in jobs.iter().zip(results) {
        if m == 0 {
            base.push(r?);
        } else {
            practice.push(r?);
        }
    }
    Ok(AblationResult { base, practice })
}
