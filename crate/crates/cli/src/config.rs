//! Run configuration with three-tier precedence: command-line flag, then
//! config file, then built-in default.
//!
//! The config file is a flat `key = value` document (one pair per line,
//! `#` comments); no nesting, so the override semantics stay unambiguous.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use qalign_core::alignment::{LossConfig, LossVariant, TrainConfig};
use qalign_core::error::{Error, Result};
use qalign_core::sampling::LadderConfig;
use serde::Serialize;

/// Fully resolved settings shared by the pipeline commands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    // Ladder construction.
    pub patch_size: usize,
    pub levels: u8,
    pub distortions: u8,
    pub min_overlap: f64,
    // Loss.
    pub m_cons: f64,
    pub m_rank: f64,
    pub lambda_cons: f64,
    pub lambda_pos: f64,
    pub lambda_neg: f64,
    pub tau: f64,
    pub variant: LossVariant,
    // Optimizer.
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch: usize,
    pub dim: usize,
    // Execution.
    pub seed: u64,
    pub jobs: usize,
    // gMAD.
    pub gmad_levels: usize,
    pub band_width: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ladder = LadderConfig::default();
        let loss = LossConfig::default();
        let train = TrainConfig::default();
        Self {
            patch_size: ladder.patch_size,
            levels: ladder.levels,
            distortions: ladder.distortions,
            min_overlap: ladder.min_overlap,
            m_cons: loss.m_cons,
            m_rank: loss.m_rank,
            lambda_cons: loss.lambda_cons,
            lambda_pos: loss.lambda_pos,
            lambda_neg: loss.lambda_neg,
            tau: loss.tau,
            variant: loss.variant,
            learning_rate: train.learning_rate,
            weight_decay: train.weight_decay,
            epochs: train.epochs,
            batch: train.batch_size,
            dim: train.dim,
            seed: 0,
            jobs: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            gmad_levels: 2,
            band_width: 0.05,
        }
    }
}

/// Flag-level values: `None` means "not given on the command line".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub patch_size: Option<usize>,
    pub levels: Option<u8>,
    pub distortions: Option<u8>,
    pub min_overlap: Option<f64>,
    pub m_cons: Option<f64>,
    pub m_rank: Option<f64>,
    pub lambda_cons: Option<f64>,
    pub lambda_pos: Option<f64>,
    pub lambda_neg: Option<f64>,
    pub tau: Option<f64>,
    pub variant: Option<LossVariant>,
    pub learning_rate: Option<f64>,
    pub weight_decay: Option<f64>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub gmad_levels: Option<usize>,
    pub band_width: Option<f64>,
}

/// Parses the flat key-value file. Unknown keys are errors so typos fail
/// loudly before any work starts.
pub fn parse_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut map = HashMap::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::format(path, format!("line {}: expected `key = value`", line_no + 1)));
        };
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::format(
                path,
                format!("line {}: unknown key `{key}` (known: {})", line_no + 1, KNOWN_KEYS.join(", ")),
            ));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::format(path, format!("line {}: duplicate key `{key}`", line_no + 1)));
        }
    }
    Ok(map)
}

pub const KNOWN_KEYS: [&str; 20] = [
    "patch_size",
    "levels",
    "distortions",
    "min_overlap",
    "m_cons",
    "m_rank",
    "lambda_cons",
    "lambda_pos",
    "lambda_neg",
    "tau",
    "variant",
    "learning_rate",
    "weight_decay",
    "epochs",
    "batch",
    "dim",
    "seed",
    "jobs",
    "gmad_levels",
    "band_width",
];

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::invalid(format!("config key `{key}`: cannot parse `{raw}`")))
}

fn parse_variant(raw: &str) -> Result<LossVariant> {
    match raw {
        "similarity-ranking" => Ok(LossVariant::SimilarityRanking),
        "quality-ranking" => Ok(LossVariant::QualityRanking),
        other => Err(Error::invalid(format!(
            "config key `variant`: `{other}` is not one of similarity-ranking, quality-ranking"
        ))),
    }
}

impl RunConfig {
    /// Applies precedence field by field: flag, else file, else default.
    pub fn resolve(file: &HashMap<String, String>, flags: &Overrides) -> Result<Self> {
        let defaults = Self::default();
        macro_rules! field {
            ($name:ident) => {
                match (&flags.$name, file.get(stringify!($name))) {
                    (Some(v), _) => v.clone(),
                    (None, Some(raw)) => parse_value(stringify!($name), raw)?,
                    (None, None) => defaults.$name,
                }
            };
        }
        let variant = match (&flags.variant, file.get("variant")) {
            (Some(v), _) => *v,
            (None, Some(raw)) => parse_variant(raw)?,
            (None, None) => defaults.variant,
        };
        let cfg = Self {
            patch_size: field!(patch_size),
            levels: field!(levels),
            distortions: field!(distortions),
            min_overlap: field!(min_overlap),
            m_cons: field!(m_cons),
            m_rank: field!(m_rank),
            lambda_cons: field!(lambda_cons),
            lambda_pos: field!(lambda_pos),
            lambda_neg: field!(lambda_neg),
            tau: field!(tau),
            variant,
            learning_rate: field!(learning_rate),
            weight_decay: field!(weight_decay),
            epochs: field!(epochs),
            batch: field!(batch),
            dim: field!(dim),
            seed: field!(seed),
            jobs: field!(jobs),
            gmad_levels: field!(gmad_levels),
            band_width: field!(band_width),
        };
        cfg.ladder_config().validate()?;
        cfg.loss_config().validate()?;
        Ok(cfg)
    }

    pub fn ladder_config(&self) -> LadderConfig {
        LadderConfig {
            patch_size: self.patch_size,
            levels: self.levels,
            distortions: self.distortions,
            min_overlap: self.min_overlap,
            seed: self.seed,
        }
    }

    pub fn loss_config(&self) -> LossConfig {
        LossConfig {
            m_cons: self.m_cons,
            m_rank: self.m_rank,
            lambda_cons: self.lambda_cons,
            lambda_pos: self.lambda_pos,
            lambda_neg: self.lambda_neg,
            tau: self.tau,
            variant: self.variant,
        }
    }

    pub fn train_config(&self, dim: usize) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            epochs: self.epochs,
            batch_size: self.batch,
            dim,
            seed: self.seed,
        }
    }
}

/// Loads the optional config file and resolves the final settings.
pub fn resolve_config(config_path: Option<&PathBuf>, flags: &Overrides) -> Result<RunConfig> {
    let file = match config_path {
        Some(path) => parse_config_file(path)?,
        None => HashMap::new(),
    };
    RunConfig::resolve(&file, flags)
}
