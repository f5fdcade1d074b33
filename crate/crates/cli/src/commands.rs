use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use cfpredict_core::dataset::{
    build_bundle, build_timeline, dataset_hash, load_dataset, make_sequences, read_timeline_csv, save_dataset,
    write_timeline_csv, FeatureMode, SyntheticConfig, TimestampFeatures, TIMELINE_CSV_HEADER,
};
use cfpredict_core::eval::{
    evaluate, median_mae, predict_next, report_csv, report_table, run_ablation, AblationConfig, EvalError,
};
use cfpredict_core::ingest::{read_handles, CodeforcesClient, FixtureTransport, HttpTransport, RateLimiter};
use cfpredict_core::models::{load_checkpoint, Model, ModelConfig, ModelKind};
use cfpredict_core::nncore::AdamConfig;
use cfpredict_core::train::{train, TrainConfig};

use crate::settings::Settings;

/// Format tag of the JSON line printed by `predict`.
pub const PREDICTION_FORMAT: &str = "cfpredict.prediction.v1";

const HTTP_TIMEOUT: Duration = Duration::from_secs(30);

/// Runs one subcommand; the returned value is the process exit code.
pub fn run(command: &str, s: &Settings) -> Result<u8> {
    let out = out_dir(s);
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let manifest = out.join(format!("run-manifest-{command}.txt"));
    std::fs::write(&manifest, s.manifest(command)).with_context(|| format!("writing {}", manifest.display()))?;
    match command {
        "fetch" => fetch(s),
        "build" => build(s).map(|_| 0),
        "train" => train_cmd(s).map(|_| 0),
        "eval" => eval(s).map(|_| 0),
        "ablate" => ablate(s).map(|_| 0),
        "predict" => predict(s).map(|_| 0),
        other => bail!("unknown command {other}"),
    }
}

fn out_dir(s: &Settings) -> PathBuf {
    PathBuf::from(s.raw("out"))
}

fn path_or(s: &Settings, key: &str, default: impl FnOnce() -> PathBuf) -> PathBuf {
    match s.raw(key) {
        "" => default(),
        p => PathBuf::from(p),
    }
}

fn dataset_path(s: &Settings) -> Result<PathBuf> {
    let mode: FeatureMode = s.get("mode")?;
    Ok(path_or(s, "dataset", || out_dir(s).join(format!("dataset-{}.cfseq", mode.name()))))
}

fn checkpoint_path(s: &Settings) -> Result<PathBuf> {
    let kind: ModelKind = s.get("model")?;
    Ok(path_or(s, "checkpoint", || out_dir(s).join(format!("{}.ckpt", kind.cli_name()))))
}

fn handles(s: &Settings) -> Result<Vec<String>> {
    match s.raw("handles") {
        "" => bail!("no handle list given (--handles FILE)"),
        p => read_handles(Path::new(p)).with_context(|| format!("reading handles file {p}")),
    }
}

fn fetch(s: &Settings) -> Result<u8> {
    let handles = handles(s)?;
    let cache = s.raw("cache_dir");
    let limiter = Arc::new(RateLimiter::new(Duration::from_millis(s.get("rate_limit_ms")?)));
    let client = if s.get("offline")? {
        CodeforcesClient::offline(cache)
    } else if !s.raw("fixtures").is_empty() {
        CodeforcesClient::new(cache, Arc::new(FixtureTransport::new(s.raw("fixtures"))), limiter)
    } else {
        let http = HttpTransport::new(HTTP_TIMEOUT).map_err(|e| anyhow!("http client: {e}"))?;
        CodeforcesClient::new(cache, Arc::new(http), limiter)
    };
    let mut failed = Vec::new();
    for h in &handles {
        match client.fetch_contestant(h) {
            Ok(r) => println!(
                "{h}: {} rated contests, {} submissions, {} standings rows",
                r.ratings.len(),
                r.submissions.len(),
                r.standings.len()
            ),
            Err(e) => {
                println!("{h}: error: {e}");
                failed.push(h.as_str());
            }
        }
    }
    println!("{} handles, {} ok, {} failed", handles.len(), handles.len() - failed.len(), failed.len());
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("failed handles: {}", failed.join(", "));
        Ok(2)
    }
}

/// Named timelines from the synthetic generator or from cached API data.
fn timelines(s: &Settings) -> Result<Vec<(String, Vec<TimestampFeatures>)>> {
    if let Some(users) = s.opt::<usize>("synthetic_users")? {
        let cfg = SyntheticConfig {
            n_users: users,
            length: s.get("synthetic_length")?,
            seed: s.get("seed")?,
            practice_effect: s.get("practice_effect")?,
            noise_sd: s.get("noise_sd")?,
            mean_ac: s.get("mean_ac")?,
            persistence: s.get("persistence")?,
            intensity_sd: s.get("intensity_sd")?,
        };
        return Ok(cfg.generate().into_iter().enumerate().map(|(i, tl)| (format!("synthetic-{i:03}"), tl)).collect());
    }
    let client = CodeforcesClient::offline(s.raw("cache_dir"));
    handles(s)?
        .into_iter()
        .map(|h| {
            let rec = client.fetch_contestant(&h).with_context(|| format!("{h}: raw data missing from cache"))?;
            let tl = build_timeline(&rec.ratings, &rec.submissions, &rec.standings).with_context(|| format!("{h}: timeline"))?;
            Ok((h, tl))
        })
        .collect()
}

fn build(s: &Settings) -> Result<()> {
    let tls = timelines(s)?;
    let mode: FeatureMode = s.get("mode")?;
    let window: usize = s.get("window")?;
    let mut samples = Vec::new();
    for (tag, (name, tl)) in tls.iter().enumerate() {
        let seqs = make_sequences(tl, window, mode, tag as u64)?;
        let note = if seqs.is_empty() { " (below window)" } else { "" };
        println!("{name}: {} contests, {} sequences{note}", tl.len(), seqs.len());
        samples.extend(seqs);
    }
    let total = samples.len();
    let bundle = build_bundle(samples, mode, s.get("split_ratio")?, s.get("split_seed")?, s.get("by_user")?)?;
    let path = dataset_path(s)?;
    save_dataset(&bundle, &path).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "{total} sequences ({} train, {} test), {} features, {} mode -> {}",
        bundle.train.len(),
        bundle.test.len(),
        mode.feature_count(),
        mode,
        path.display()
    );
    if !s.raw("timeline_csv").is_empty() {
        let mut buf = format!("{TIMELINE_CSV_HEADER}\n").into_bytes();
        for (name, tl) in &tls {
            write_timeline_csv(&mut buf, name, tl)?;
        }
        std::fs::write(s.raw("timeline_csv"), buf).with_context(|| format!("writing {}", s.raw("timeline_csv")))?;
    }
    Ok(())
}

fn model_config(s: &Settings, kind: ModelKind, features: usize, seq_len: usize, init_seed: u64) -> Result<ModelConfig> {
    Ok(ModelConfig {
        kind,
        n_layers: s.get("layers")?,
        hidden: s.get("hidden")?,
        dropout: s.get("dropout")?,
        dense_hidden: s.get("dense_hidden")?,
        input_features: features,
        output_features: features,
        seq_len,
        init_seed,
    })
}

fn train_config(s: &Settings) -> Result<TrainConfig> {
    Ok(TrainConfig {
        epochs: s.get("epochs")?,
        batch_size: s.get("batch_size")?,
        adam: AdamConfig { lr: s.get("lr")?, beta1: s.get("beta1")?, beta2: s.get("beta2")?, eps: s.get("eps")? },
        shuffle_seed: s.get("shuffle_seed")?,
        val_fraction: s.get("val_fraction")?,
        checkpoint_path: None,
        history_path: None,
        mimic_paper_checkpointing: s.get("mimic_paper_checkpointing")?,
        clip_norm: s.opt("clip_norm")?,
    })
}

fn train_cmd(s: &Settings) -> Result<()> {
    let path = dataset_path(s)?;
    let bundle = load_dataset(&path).with_context(|| format!("reading {}", path.display()))?;
    let kind: ModelKind = s.get("model")?;
    let features = bundle.feature_mode.feature_count();
    let mut model = Model::new(model_config(s, kind, features, bundle.steps, s.get("init_seed")?)?)?;
    let out = out_dir(s);
    let ckpt = out.join(format!("{}.ckpt", kind.cli_name()));
    let history = out.join(format!("{}-history.csv", kind.cli_name()));
    let cfg = TrainConfig { checkpoint_path: Some(ckpt.clone()), history_path: Some(history.clone()), ..train_config(s)? };
    log::info!("{}", model.describe());
    let outcome = train(&mut model, &bundle, &cfg)?;
    println!(
        "{kind} on {} {} mode: best validation MAE {:.3} at epoch {} of {}",
        path.display(),
        bundle.feature_mode,
        outcome.checkpoint.provenance.best_val_mae,
        outcome.best_epoch,
        outcome.history.len()
    );
    println!("checkpoint {}\nhistory {}", ckpt.display(), history.display());
    Ok(())
}

fn eval(s: &Settings) -> Result<()> {
    let ckpt_path = checkpoint_path(s)?;
    let ckpt = load_checkpoint(&ckpt_path).with_context(|| format!("reading {}", ckpt_path.display()))?;
    let path = dataset_path(s)?;
    let bundle = load_dataset(&path).with_context(|| format!("reading {}", path.display()))?;
    let features = ckpt.model.config().input_features;
    if features != bundle.feature_mode.feature_count() {
        bail!(
            "checkpoint expects {features} features but {} has {} ({} mode)",
            path.display(),
            bundle.feature_mode.feature_count(),
            bundle.feature_mode
        );
    }
    if ckpt.scaler != bundle.scaler {
        bail!("checkpoint was trained with a different scaler than {}", path.display());
    }
    if ckpt.provenance.dataset_hash != dataset_hash(&bundle) {
        log::warn!("checkpoint was trained on a different dataset than {}", path.display());
    }
    let report = evaluate(&ckpt.model, &bundle.test, &bundle.scaler, bundle.feature_mode, ckpt.provenance.init_seed)?;
    let kind = ckpt.model.kind();
    print!("{}", report_table(&format!("{} mode", bundle.feature_mode), std::slice::from_ref(&report)));
    println!(
        "test MAE {:.6}; selection MAE stored in checkpoint {:.6} ({:?})",
        report.mae, ckpt.provenance.best_val_mae, ckpt.provenance.selection
    );
    let csv = out_dir(s).join(format!("report-{}-{}.csv", kind.cli_name(), bundle.feature_mode));
    std::fs::write(&csv, report_csv(&[report])).with_context(|| format!("writing {}", csv.display()))?;
    println!("report {}", csv.display());
    Ok(())
}

fn ablate(s: &Settings) -> Result<()> {
    let tls: Vec<Vec<TimestampFeatures>> = timelines(s)?.into_iter().map(|(_, tl)| tl).collect();
    let cfg = AblationConfig {
        kinds: s.list("models")?,
        seeds: s.list("seeds")?,
        window: s.get("window")?,
        split_ratio: s.get("split_ratio")?,
        split_seed: s.get("split_seed")?,
        by_user: s.get("by_user")?,
        n_layers: s.get("layers")?,
        hidden: s.get("hidden")?,
        dropout: s.get("dropout")?,
        dense_hidden: s.get("dense_hidden")?,
        train: train_config(s)?,
    };
    if cfg.kinds.is_empty() || cfg.seeds.is_empty() {
        bail!("ablation needs at least one model and one seed");
    }
    let res = run_ablation(&tls, &cfg)?;
    let out = out_dir(s);
    for (mode, title) in [(FeatureMode::Base, "Without practice features"), (FeatureMode::WithPractice, "With practice features")] {
        let reports = res.for_mode(mode);
        let csv = out.join(format!("ablation-{}.csv", mode.name()));
        std::fs::write(&csv, report_csv(reports)).with_context(|| format!("writing {}", csv.display()))?;
        print!("{}", report_table(title, reports));
        println!("report {}\n", csv.display());
    }
    for &k in &cfg.kinds {
        let base = median_mae(&res.base, k).unwrap_or(f64::NAN);
        let practice = median_mae(&res.practice, k).unwrap_or(f64::NAN);
        println!("{k}: median MAE {base:.3} without practice, {practice:.3} with practice");
    }
    Ok(())
}

fn predict(s: &Settings) -> Result<()> {
    let ckpt_path = checkpoint_path(s)?;
    let ckpt = load_checkpoint(&ckpt_path).with_context(|| format!("reading {}", ckpt_path.display()))?;
    let features = ckpt.model.config().input_features;
    let mode = FeatureMode::from_feature_count(features).ok_or_else(|| anyhow!("checkpoint has {features} features"))?;
    let (name, timeline) = if !s.raw("timeline_csv").is_empty() {
        let path = s.raw("timeline_csv");
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        read_timeline_csv(&text)?.into_iter().next().ok_or_else(|| anyhow!("{path} holds no timeline"))?
    } else {
        let handle = s.raw("handle");
        if handle.is_empty() {
            bail!("no contestant given (--handle or --timeline)");
        }
        let rec = CodeforcesClient::offline(s.raw("cache_dir"))
            .fetch_contestant(handle)
            .with_context(|| format!("{handle}: raw data missing from cache"))?;
        (handle.to_string(), build_timeline(&rec.ratings, &rec.submissions, &rec.standings)?)
    };
    let p = match predict_next(&ckpt.model, &ckpt.scaler, &timeline, mode) {
        Err(EvalError::InsufficientHistory { need, .. }) => bail!("insufficient history (need {need} contests)"),
        other => other?,
    };
    println!("{name}: current rating {}", p.current_rating);
    println!("predicted rating {} ({}, {:+.2}%)", p.predicted_rating, p.direction.label(), p.percent_change);
    println!("title {} (division {}, {})", p.title.title, p.title.division, p.title.color);
    let record = serde_json::json!({
        "format": PREDICTION_FORMAT,
        "handle": name,
        "model": ckpt.model.kind().cli_name(),
        "feature_mode": mode.name(),
        "current_rating": p.current_rating,
        "predicted_rating": p.predicted_rating,
        "raw_rating": p.raw_rating,
        "direction": p.direction.label(),
        "percent_change": p.percent_change,
        "title": p.title.title,
        "division": p.title.division,
    });
    println!("{record}");
    Ok(())
}
