//! Tracker configuration from a flat `key=value` file plus flag overrides.

use std::path::{Path, PathBuf};

use clap::Args;
use sigmil::TrackerConfig;

use crate::error::{CliError, CliResult};

/// Keys accepted in a config file, in the order they are documented.
pub const KEYS: [&str; 13] = [
    "num_weak",
    "num_select",
    "ensemble",
    "alpha_pos",
    "lr",
    "prior",
    "seed",
    "pos_radius",
    "neg_inner",
    "neg_outer",
    "neg_count",
    "neg_train",
    "search_radius",
];

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Flat key=value file; flags given on the command line win.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub num_weak: Option<usize>,
    #[arg(long)]
    pub num_select: Option<usize>,
    /// Number of randomized learners used for significance.
    #[arg(long)]
    pub ensemble: Option<usize>,
    #[arg(long)]
    pub alpha_pos: Option<f64>,
    #[arg(long)]
    pub search_radius: Option<f64>,
    #[arg(long)]
    pub pos_radius: Option<f64>,
    #[arg(long)]
    pub neg_outer: Option<f64>,
    #[arg(long)]
    pub neg_count: Option<usize>,
    #[arg(long)]
    pub neg_train: Option<usize>,
    /// Learning rate of the Gaussian weak classifiers.
    #[arg(long)]
    pub lr: Option<f64>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Input(format!("config key {key}: cannot parse {value:?}")))
}

/// Applies one `key = value` setting.
pub fn set(cfg: &mut TrackerConfig, key: &str, value: &str) -> CliResult<()> {
    match key {
        "num_weak" => cfg.num_weak = parse(key, value)?,
        "num_select" => cfg.num_select = parse(key, value)?,
        "ensemble" => cfg.ensemble_size = parse(key, value)?,
        "alpha_pos" => cfg.alpha.alpha_pos = parse(key, value)?,
        "lr" => cfg.learning_rate = parse(key, value)?,
        "prior" => cfg.prior = parse(key, value)?,
        "seed" => cfg.seed = parse(key, value)?,
        "pos_radius" => cfg.sampling.pos_radius = parse(key, value)?,
        "neg_inner" => cfg.sampling.neg_inner = parse(key, value)?,
        "neg_outer" => cfg.sampling.neg_outer = parse(key, value)?,
        "neg_count" => cfg.sampling.neg_count = parse(key, value)?,
        "neg_train" => cfg.sampling.neg_train_count = parse(key, value)?,
        "search_radius" => cfg.sampling.search_radius = parse(key, value)?,
        other => return Err(CliError::Input(format!("unknown config key {other:?}"))),
    }
    Ok(())
}

/// Parses config text. `#` starts a comment; blank lines are ignored.
pub fn apply_text(cfg: &mut TrackerConfig, text: &str) -> CliResult<()> {
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("config line {}: expected key=value, got {raw:?}", n + 1)))?;
        set(cfg, key.trim(), value.trim())?;
    }
    Ok(())
}

pub fn load_file(cfg: &mut TrackerConfig, path: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    apply_text(cfg, &text)
}

/// Renders every key, so that the output can be read back with [`apply_text`].
pub fn to_text(cfg: &TrackerConfig) -> String {
    let s = &cfg.sampling;
    let values = [
        cfg.num_weak.to_string(),
        cfg.num_select.to_string(),
        cfg.ensemble_size.to_string(),
        cfg.alpha.alpha_pos.to_string(),
        cfg.learning_rate.to_string(),
        cfg.prior.to_string(),
        cfg.seed.to_string(),
        s.pos_radius.to_string(),
        s.neg_inner.to_string(),
        s.neg_outer.to_string(),
        s.neg_count.to_string(),
        s.neg_train_count.to_string(),
        s.search_radius.to_string(),
    ];
    KEYS.iter().zip(values).map(|(k, v)| format!("{k}={v}\n")).collect()
}

impl Overrides {
    /// Defaults, then the config file, then flags; the result is validated.
    pub fn resolve(&self) -> CliResult<TrackerConfig> {
        let mut cfg = TrackerConfig::default();
        if let Some(path) = &self.config {
            load_file(&mut cfg, path)?;
        }
        self.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut TrackerConfig) {
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.num_weak {
            cfg.num_weak = v;
        }
        if let Some(v) = self.num_select {
            cfg.num_select = v;
        }
        if let Some(v) = self.ensemble {
            cfg.ensemble_size = v;
        }
        if let Some(v) = self.alpha_pos {
            cfg.alpha.alpha_pos = v;
        }
        if let Some(v) = self.search_radius {
            cfg.sampling.search_radius = v;
        }
        if let Some(v) = self.pos_radius {
            cfg.sampling.pos_radius = v;
        }
        if let Some(v) = self.neg_outer {
            cfg.sampling.neg_outer = v;
        }
        if let Some(v) = self.neg_count {
            cfg.sampling.neg_count = v;
        }
        if let Some(v) = self.neg_train {
            cfg.sampling.neg_train_count = v;
        }
        if let Some(v) = self.lr {
            cfg.learning_rate = v;
        }
    }
}
