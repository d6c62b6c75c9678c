use std::path::PathBuf;

use crate::harness::config::ConfigError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample {value} at grid index {index:?}")]
    NonFiniteSample { index: Vec<usize>, value: f64 },

    #[error("multiplier symbol is not finite at k = {k:?}")]
    NonFiniteSymbol { k: Vec<i64> },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("alpha = {alpha} must lie in [0, {dim}]")]
    AlphaOutOfRange { alpha: f64, dim: usize },

    #[error("block index {j} outside [-1, {j_max}]")]
    BlockOutOfRange { j: i32, j_max: i32 },

    #[error("invalid Besov parameters: {0}")]
    InvalidBesov(String),

    #[error("homogeneous norm requires a zero-mean field, got mean {0:e}")]
    NonZeroMean(f64),

    #[error("equilibrium profile must depend on the last coordinate only (deviation {0:e})")]
    NotStratified(f64),

    #[error("solver state diverged at t = {0}")]
    Diverged(f64),

    #[error("unknown initial datum preset `{0}`")]
    UnknownPreset(String),

    #[error("snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error("{}", format_config_errors(.0))]
    Config(Vec<ConfigError>),

    #[error("invalid scan: {0}")]
    InvalidScan(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_config_errors(errors: &[ConfigError]) -> String {
    let lines: Vec<String> = errors.iter().map(ToString::to_string).collect();
    format!("invalid configuration:\n  {}", lines.join("\n  "))
}
