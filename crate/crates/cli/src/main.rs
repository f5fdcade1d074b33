mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::Settings;

/// Contest rating forecasts from rating history and practice activity.
#[derive(Parser, Debug)]
#[command(name = "cfpredict", version)]
struct Cli {
    /// Raw API response cache.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Serve API requests from the cache only.
    #[arg(long, global = true)]
    offline: bool,
    /// Default for every seed not given explicitly.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Minimum gap between API requests.
    #[arg(long, global = true)]
    rate_limit_ms: Option<u64>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Download and cache ratings, submissions and standings for a handle list.
    Fetch {
        #[arg(long)]
        handles: Option<PathBuf>,
        /// Answer requests from a directory of canned responses instead of the network.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Build a scaled, split sequence dataset from cached data or the synthetic generator.
    Build {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        mode: Option<String>,
        /// Dataset file to write (default `<out>/dataset-<mode>.cfseq`).
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Also export the timelines as CSV.
        #[arg(long)]
        timeline_csv: Option<PathBuf>,
    },
    /// Train one model on a dataset file.
    Train {
        /// Dataset file (default `<out>/dataset-<mode>.cfseq`).
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        model_args: ModelArgs,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Score a checkpoint on a dataset's test split.
    Eval {
        /// Checkpoint file (default `<out>/<model>.ckpt`).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        mode: Option<String>,
    },
    /// Train every model with and without practice features and compare.
    Ablate {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated model kinds.
        #[arg(long)]
        models: Option<String>,
        /// Comma-separated training seeds (default: --seed).
        #[arg(long)]
        seeds: Option<String>,
        #[command(flatten)]
        model_args: ModelArgs,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Forecast the next rating of one contestant.
    Predict {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        model: Option<String>,
        /// Cached handle to forecast.
        #[arg(long)]
        handle: Option<String>,
        /// Read the contestant's timeline from an exported CSV instead of the cache.
        #[arg(long, conflicts_with = "handle")]
        timeline: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Handle list whose data is already cached.
    #[arg(long)]
    handles: Option<PathBuf>,
    /// Use the synthetic generator with this many contestants.
    #[arg(long, conflicts_with = "handles")]
    synthetic_users: Option<usize>,
    #[arg(long)]
    synthetic_length: Option<usize>,
    #[arg(long)]
    practice_effect: Option<f64>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    mean_ac: Option<f64>,
    #[arg(long)]
    persistence: Option<f64>,
    #[arg(long)]
    intensity_sd: Option<f64>,
}

#[derive(Args, Debug)]
struct DataArgs {
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    split_ratio: Option<f64>,
    #[arg(long)]
    split_seed: Option<u64>,
    /// Keep each contestant's sequences on one side of the split.
    #[arg(long)]
    by_user: bool,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    dense_hidden: Option<usize>,
    #[arg(long)]
    init_seed: Option<u64>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    shuffle_seed: Option<u64>,
    #[arg(long)]
    val_fraction: Option<f64>,
    /// Pick the best epoch on the test split, as the original protocol did.
    #[arg(long)]
    mimic_paper_checkpointing: bool,
    #[arg(long)]
    clip_norm: Option<f64>,
}

impl SourceArgs {
    fn apply(&self, s: &mut Settings) {
        s.flag("handles", self.handles.as_ref().map(|p| p.display()));
        s.flag("synthetic_users", self.synthetic_users);
        s.flag("synthetic_length", self.synthetic_length);
        s.flag("practice_effect", self.practice_effect);
        s.flag("noise_sd", self.noise_sd);
        s.flag("mean_ac", self.mean_ac);
        s.flag("persistence", self.persistence);
        s.flag("intensity_sd", self.intensity_sd);
    }
}

impl DataArgs {
    fn apply(&self, s: &mut Settings) {
        s.flag("window", self.window);
        s.flag("split_ratio", self.split_ratio);
        s.flag("split_seed", self.split_seed);
        s.switch("by_user", self.by_user);
    }
}

impl ModelArgs {
    fn apply(&self, s: &mut Settings) {
        s.flag("layers", self.layers);
        s.flag("hidden", self.hidden);
        s.flag("dropout", self.dropout);
        s.flag("dense_hidden", self.dense_hidden);
        s.flag("init_seed", self.init_seed);
    }
}

impl TrainArgs {
    fn apply(&self, s: &mut Settings) {
        s.flag("epochs", self.epochs);
        s.flag("batch_size", self.batch_size);
        s.flag("lr", self.lr);
        s.flag("shuffle_seed", self.shuffle_seed);
        s.flag("val_fraction", self.val_fraction);
        s.switch("mimic_paper_checkpointing", self.mimic_paper_checkpointing);
        s.flag("clip_norm", self.clip_norm);
    }
}

fn settings_for(cli: &Cli) -> anyhow::Result<(&'static str, Settings)> {
    let mut s = Settings::defaults();
    if let Some(path) = &cli.config {
        s.apply_file(path)?;
    }
    s.flag("cache_dir", cli.cache_dir.as_ref().map(|p| p.display()));
    s.switch("offline", cli.offline);
    s.flag("seed", cli.seed);
    s.flag("out", cli.out.as_ref().map(|p| p.display()));
    s.flag("rate_limit_ms", cli.rate_limit_ms);
    let name = match &cli.command {
        Command::Fetch { handles, fixtures } => {
            s.flag("handles", handles.as_ref().map(|p| p.display()));
            s.flag("fixtures", fixtures.as_ref().map(|p| p.display()));
            "fetch"
        }
        Command::Build { source, data, mode, dataset, timeline_csv } => {
            source.apply(&mut s);
            data.apply(&mut s);
            s.flag("mode", mode.as_ref());
            s.flag("dataset", dataset.as_ref().map(|p| p.display()));
            s.flag("timeline_csv", timeline_csv.as_ref().map(|p| p.display()));
            "build"
        }
        Command::Train { dataset, mode, model, model_args, train } => {
            s.flag("dataset", dataset.as_ref().map(|p| p.display()));
            s.flag("mode", mode.as_ref());
            s.flag("model", model.as_ref());
            model_args.apply(&mut s);
            train.apply(&mut s);
            "train"
        }
        Command::Eval { checkpoint, model, dataset, mode } => {
            s.flag("checkpoint", checkpoint.as_ref().map(|p| p.display()));
            s.flag("model", model.as_ref());
            s.flag("dataset", dataset.as_ref().map(|p| p.display()));
            s.flag("mode", mode.as_ref());
            "eval"
        }
        Command::Ablate { source, data, models, seeds, model_args, train } => {
            source.apply(&mut s);
            data.apply(&mut s);
            s.flag("models", models.as_ref());
            s.flag("seeds", seeds.as_ref());
            model_args.apply(&mut s);
            train.apply(&mut s);
            "ablate"
        }
        Command::Predict { checkpoint, model, handle, timeline } => {
            s.flag("checkpoint", checkpoint.as_ref().map(|p| p.display()));
            s.flag("model", model.as_ref());
            s.flag("handle", handle.as_ref());
            s.flag("timeline_csv", timeline.as_ref().map(|p| p.display()));
            "predict"
        }
    };
    s.resolve();
    Ok((name, s))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = settings_for(&cli).and_then(|(name, s)| commands::run(name, &s));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
