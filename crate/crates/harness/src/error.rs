use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),
    #[error(transparent)]
    Core(#[from] hierobs::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("malformed CSV: {0}")]
    Format(String),
    #[error("plot {}: {reason}", path.display())]
    Plot { path: PathBuf, reason: String },
    #[error("no samples in fit window [{t0}, {t1}]")]
    EmptyWindow { t0: f64, t1: f64 },
    #[error("nonpositive value {value} at t = {t} in fit window")]
    NonPositive { t: f64, value: f64 },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: &str) -> Self {
        Self::InvalidConfig {
            field,
            reason: reason.to_owned(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
