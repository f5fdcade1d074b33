use std::path::{Path, PathBuf};
use std::process::Command;

use cfpredict_core::dataset::{load_dataset, FeatureMode};
use cfpredict_core::eval::rating_to_title;
use cfpredict_core::models::{load_checkpoint, ModelKind};

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(dir: &Path, args: &[&str]) -> Out {
    let out = Command::new(env!("CARGO_BIN_EXE_cfpredict"))
        .current_dir(dir)
        .args(["--rate-limit-ms", "0"])
        .args(args)
        .output()
        .expect("binary runs");
    Out {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/api")
}

const TINY: [&str; 8] = ["--layers", "1", "--hidden", "4", "--dense-hidden", "4", "--batch-size", "64"];

fn build_synthetic(dir: &Path, mode: &str, extra: &[&str]) -> Out {
    let mut args = vec!["build", "--synthetic-users", "5", "--synthetic-length", "20", "--mode", mode];
    args.extend_from_slice(extra);
    run(dir, &args)
}

fn train_tiny(dir: &Path, mode: &str, model: &str, extra: &[&str]) -> Out {
    let mut args = vec!["train", "--mode", mode, "--model", model];
    args.extend_from_slice(&TINY);
    args.extend_from_slice(extra);
    if !extra.contains(&"--epochs") {
        args.extend_from_slice(&["--epochs", "1"]);
    }
    run(dir, &args)
}

#[test]
fn empty_handle_list() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("handles.txt"), "# nobody\n\n").unwrap();
    let out = run(dir.path(), &["fetch", "--handles", "handles.txt", "--offline"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("0 handles"), "{}", out.stdout);
    assert!(dir.path().join("out/run-manifest-fetch.txt").exists());
}

#[test]
fn fetch_reports_partial_failure_and_replays_offline() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("handles.txt"), "tourist\nghost\n").unwrap();
    let fx = fixtures();
    let first = run(dir.path(), &["fetch", "--handles", "handles.txt", "--fixtures", fx.to_str().unwrap()]);
    assert_eq!(first.code, 2, "{}", first.stderr);
    assert!(first.stdout.contains("tourist: 3 rated contests, 5 submissions, 2 standings rows"), "{}", first.stdout);
    assert!(first.stdout.contains("ghost: error: unknown handle"), "{}", first.stdout);
    assert!(first.stderr.contains("ghost"));
    let again = run(dir.path(), &["fetch", "--handles", "handles.txt", "--offline"]);
    assert_eq!(again.code, 2);
    assert_eq!(again.stdout, first.stdout);
}

#[test]
fn unreadable_handles_and_bad_usage_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["fetch", "--handles", "missing.txt"]).code, 1);
    assert_eq!(run(dir.path(), &["frobnicate"]).code, 1);
    assert_eq!(run(dir.path(), &["train", "--epochs", "many"]).code, 1);
    assert_eq!(run(dir.path(), &["--help"]).code, 0);
}

#[test]
fn build_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("one.txt"), "tourist\n").unwrap();
    // nothing cached yet
    let cold = run(dir.path(), &["build", "--handles", "one.txt"]);
    assert_eq!(cold.code, 1);
    assert!(cold.stderr.contains("missing from cache"), "{}", cold.stderr);
    let fx = fixtures();
    assert_eq!(run(dir.path(), &["fetch", "--handles", "one.txt", "--fixtures", fx.to_str().unwrap()]).code, 0);
    let short = run(dir.path(), &["build", "--handles", "one.txt"]);
    assert!(short.stdout.contains("tourist: 3 contests, 0 sequences (below window)"), "{}", short.stdout);
    assert_eq!(short.code, 1, "no sequences means no dataset");
}

#[test]
fn build_counts_and_feature_width() {
    let dir = tempfile::tempdir().unwrap();
    let base = build_synthetic(dir.path(), "base", &["--timeline-csv", "tl.csv"]);
    assert_eq!(base.code, 0, "{}", base.stderr);
    assert_eq!(base.stdout.matches("20 contests, 5 sequences").count(), 5, "{}", base.stdout);
    assert!(base.stdout.contains("25 sequences (20 train, 5 test), 3 features"), "{}", base.stdout);
    let b = load_dataset(&dir.path().join("out/dataset-base.cfseq")).unwrap();
    assert_eq!(b.feature_mode, FeatureMode::Base);
    assert_eq!(b.train.len() + b.test.len(), 25);
    let rows = std::fs::read_to_string(dir.path().join("tl.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 5 * 20);

    assert_eq!(build_synthetic(dir.path(), "practice", &[]).code, 0);
    let p = load_dataset(&dir.path().join("out/dataset-practice.cfseq")).unwrap();
    assert_eq!(p.feature_mode.feature_count(), 5);
    assert_eq!(p.train[0].inputs.cols(), 5);
}

#[test]
fn train_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(build_synthetic(dir.path(), "practice", &[]).code, 0);
    let out = train_tiny(dir.path(), "practice", "lstm-attn", &[]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("best validation MAE"));
    let history = std::fs::read_to_string(dir.path().join("out/lstm-attn-history.csv")).unwrap();
    assert_eq!(history.lines().count(), 2, "{history}");
    let ckpt = load_checkpoint(&dir.path().join("out/lstm-attn.ckpt")).unwrap();
    assert_eq!(ckpt.model.kind(), ModelKind::LstmAttn);
    assert_eq!(ckpt.model.config().input_features, 5);

    let first = std::fs::read(dir.path().join("out/lstm-attn.ckpt")).unwrap();
    assert_eq!(train_tiny(dir.path(), "practice", "lstm-attn", &[]).code, 0);
    assert_eq!(std::fs::read(dir.path().join("out/lstm-attn.ckpt")).unwrap(), first, "same flags, same bytes");

    let eval = run(dir.path(), &["eval", "--mode", "practice", "--model", "lstm-attn"]);
    assert_eq!(eval.code, 0, "{}", eval.stderr);
    assert!(eval.stdout.contains("LSTM + Attention") && eval.stdout.contains("RMSE"), "{}", eval.stdout);
    let csv = std::fs::read_to_string(dir.path().join("out/report-lstm-attn-practice.csv")).unwrap();
    let cells: Vec<f64> = csv.lines().nth(1).unwrap().split(',').skip(2).take(2).map(|c| c.parse().unwrap()).collect();
    assert!((cells[0] * cells[0] - cells[1]).abs() <= 1e-9 * cells[1]);
}

#[test]
fn eval_reproduces_selection_mae_in_mimic_mode() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(build_synthetic(dir.path(), "base", &[]).code, 0);
    let out = train_tiny(dir.path(), "base", "gru", &["--mimic-paper-checkpointing", "--epochs", "3"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let ckpt = load_checkpoint(&dir.path().join("out/gru.ckpt")).unwrap();
    assert_eq!(run(dir.path(), &["eval", "--mode", "base", "--model", "gru"]).code, 0);
    let csv = std::fs::read_to_string(dir.path().join("out/report-gru-base.csv")).unwrap();
    let mae: f64 = csv.lines().nth(1).unwrap().split(',').nth(4).unwrap().parse().unwrap();
    assert!((mae - ckpt.provenance.best_val_mae).abs() <= 1e-9 * mae.max(1.0), "{mae} vs {}", ckpt.provenance.best_val_mae);
}

#[test]
fn eval_rejects_feature_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(build_synthetic(dir.path(), "base", &[]).code, 0);
    assert_eq!(build_synthetic(dir.path(), "practice", &[]).code, 0);
    assert_eq!(train_tiny(dir.path(), "base", "lstm", &[]).code, 0);
    let out = run(dir.path(), &["eval", "--mode", "practice", "--model", "lstm"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("expects 3 features"), "{}", out.stderr);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(build_synthetic(dir.path(), "base", &[]).code, 0);
    std::fs::write(dir.path().join("run.conf"), "epochs = 3\nmodel = gru\nmode = base\n").unwrap();
    let mut args = vec!["--config", "run.conf", "train", "--epochs", "2"];
    args.extend_from_slice(&TINY);
    assert_eq!(run(dir.path(), &args).code, 0);
    let history = std::fs::read_to_string(dir.path().join("out/gru-history.csv")).unwrap();
    assert_eq!(history.lines().count(), 3, "flag wins over file");
    let manifest = std::fs::read_to_string(dir.path().join("out/run-manifest-train.txt")).unwrap();
    assert!(manifest.contains("epochs = 2\n") && manifest.contains("model = gru\n") && manifest.contains("shuffle_seed = 0\n"));
    // a manifest is itself a valid config
    let mut again = vec!["--config", "out/run-manifest-train.txt", "train"];
    again.extend_from_slice(&TINY);
    assert_eq!(run(dir.path(), &again).code, 0);
}

#[test]
fn ablate_writes_two_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["ablate", "--synthetic-users", "4", "--synthetic-length", "20", "--epochs", "1", "--seeds", "1,2"];
    args.extend_from_slice(&TINY);
    let out = run(dir.path(), &args);
    assert_eq!(out.code, 0, "{}", out.stderr);
    for mode in ["base", "practice"] {
        let csv = std::fs::read_to_string(dir.path().join(format!("out/ablation-{mode}.csv"))).unwrap();
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 8);
        for row in rows {
            let c: Vec<&str> = row.split(',').collect();
            assert_eq!(c[1], mode);
            let (rmse, mse): (f64, f64) = (c[2].parse().unwrap(), c[3].parse().unwrap());
            assert!((rmse * rmse - mse).abs() <= 1e-9 * mse);
        }
    }
    let csvs = std::fs::read_dir(dir.path().join("out")).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv")).count();
    assert_eq!(csvs, 2);
    let header = out.stdout.lines().find(|l| l.starts_with("Metric")).unwrap();
    for col in ["LSTM", "LSTM + Attention", "GRU", "Bi-LSTM"] {
        assert!(header.contains(col), "{header}");
    }
}

#[test]
fn predict_from_timeline_and_short_history() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(build_synthetic(dir.path(), "practice", &["--timeline-csv", "tl.csv"]).code, 0);
    assert_eq!(train_tiny(dir.path(), "practice", "lstm", &[]).code, 0);
    let out = run(dir.path(), &["predict", "--timeline", "tl.csv"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let json: serde_json::Value = serde_json::from_str(out.stdout.lines().last().unwrap()).unwrap();
    assert_eq!(json["format"], "cfpredict.prediction.v1");
    assert_eq!(json["handle"], "synthetic-000");
    let predicted = json["predicted_rating"].as_i64().unwrap();
    assert_eq!(json["title"], rating_to_title(predicted).title);
    assert!(["UP", "DOWN", "FLAT"].contains(&json["direction"].as_str().unwrap()));
    assert!(out.stdout.contains(&format!("predicted rating {predicted}")));

    std::fs::write(dir.path().join("one.txt"), "tourist\n").unwrap();
    let fx = fixtures();
    assert_eq!(run(dir.path(), &["fetch", "--handles", "one.txt", "--fixtures", fx.to_str().unwrap()]).code, 0);
    let short = run(dir.path(), &["predict", "--handle", "tourist"]);
    assert_eq!(short.code, 1);
    assert!(short.stderr.contains("insufficient history (need 15 contests)"), "{}", short.stderr);
}

#[test]
fn constant_rating_predicts_no_change() {
    let dir = tempfile::tempdir().unwrap();
    let gen = [
        "build", "--synthetic-users", "30", "--synthetic-length", "20", "--practice-effect", "0", "--noise-sd", "0",
        "--mode", "base", "--timeline-csv", "tl.csv",
    ];
    assert_eq!(run(dir.path(), &gen).code, 0);
    let mut changes = Vec::new();
    for seed in ["1", "2", "3"] {
        let args = [
            "--seed", seed, "train", "--mode", "base", "--layers", "1", "--hidden", "16", "--dense-hidden", "16",
            "--dropout", "0", "--epochs", "150", "--batch-size", "32", "--lr", "0.01",
        ];
        let out = run(dir.path(), &args);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let p = run(dir.path(), &["predict", "--timeline", "tl.csv"]);
        assert_eq!(p.code, 0, "{}", p.stderr);
        let json: serde_json::Value = serde_json::from_str(p.stdout.lines().last().unwrap()).unwrap();
        changes.push(json["raw_rating"].as_f64().unwrap() - json["current_rating"].as_f64().unwrap());
    }
    changes.sort_by(f64::total_cmp);
    assert!(changes[1].abs() < 10.0, "{changes:?}");
}
