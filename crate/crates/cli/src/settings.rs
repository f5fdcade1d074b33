//! Effective settings: built-in defaults, overlaid by a `key = value` config
//! file, overlaid by command-line flags. The merged map is also what every run
//! writes to its manifest, so a manifest can be fed back with `--config`.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Every recognised key with its default. An empty default means "unset".
pub const DEFAULTS: &[(&str, &str)] = &[
    ("cache_dir", "cf-cache"),
    ("offline", "false"),
    ("rate_limit_ms", "2000"),
    ("seed", "0"),
    ("out", "out"),
    ("handles", ""),
    ("fixtures", ""),
    ("window", "16"),
    ("mode", "practice"),
    ("split_ratio", "0.8"),
    ("split_seed", ""),
    ("by_user", "false"),
    ("synthetic_users", ""),
    ("synthetic_length", "40"),
    ("practice_effect", "8"),
    ("noise_sd", "25"),
    ("persistence", "0.8"),
    ("mean_ac", "4"),
    ("intensity_sd", "0.5"),
    ("model", "lstm"),
    ("models", "lstm,lstm-attn,gru,bilstm"),
    ("layers", "4"),
    ("hidden", "256"),
    ("dropout", "0.5"),
    ("dense_hidden", "100"),
    ("init_seed", ""),
    ("epochs", "1000"),
    ("batch_size", "256"),
    ("lr", "0.001"),
    ("beta1", "0.9"),
    ("beta2", "0.999"),
    ("eps", "1e-8"),
    ("shuffle_seed", ""),
    ("seeds", ""),
    ("val_fraction", "0.1"),
    ("mimic_paper_checkpointing", "false"),
    ("clip_norm", ""),
    ("dataset", ""),
    ("checkpoint", ""),
    ("handle", ""),
    ("timeline_csv", ""),
];

/// Keys whose unset value falls back to `seed`.
const SEED_KEYS: [&str; 3] = ["split_seed", "init_seed", "shuffle_seed"];

#[derive(Clone, Debug)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn normalise(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_")
}

impl Settings {
    pub fn defaults() -> Self {
        Self { values: DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect() }
    }

    /// Applies a flat config file: one `key = value` per line, `#` comments.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), n + 1))?;
            self.set(&normalise(k), v.trim())
                .with_context(|| format!("{}:{}", path.display(), n + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = normalise(key);
        match self.values.get_mut(&key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => bail!("unknown setting {key:?}"),
        }
    }

    /// Overrides `key` when a flag was given.
    pub fn flag<T: Display>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, &v.to_string()).expect("flag names are known settings");
        }
    }

    /// Boolean flags only ever switch a setting on.
    pub fn switch(&mut self, key: &str, on: bool) {
        if on {
            self.set(key, "true").expect("flag names are known settings");
        }
    }

    /// Fills unset per-purpose seeds from `seed`.
    pub fn resolve(&mut self) {
        let seed = self.values["seed"].clone();
        for k in SEED_KEYS {
            if self.values[k].is_empty() {
                self.values.insert(k.to_string(), seed.clone());
            }
        }
        if self.values["seeds"].is_empty() {
            self.values.insert("seeds".into(), seed);
        }
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        let raw = self.raw(key);
        raw.parse::<T>().map_err(|e| anyhow!("setting {key} = {raw:?}: {e}"))
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.raw(key) {
            "" | "none" => Ok(None),
            _ => self.get(key).map(Some),
        }
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| anyhow!("setting {key}: {s:?}: {e}")))
            .collect()
    }

    /// `key = value` lines in key order, loadable again with `--config`.
    pub fn manifest(&self, command: &str) -> String {
        let mut s = format!("# cfpredict {} run manifest\n# command: {command}\n", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}
