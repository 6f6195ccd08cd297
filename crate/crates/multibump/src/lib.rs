//! Configuration files, the solver pipeline, run reports and field export
//! for `multibump-core`.
//!
//! A run reads a TOML configuration ([`config::RunConfig`]), executes the
//! stages of [`pipeline::run_pipeline`] and writes a JSON report plus one CSV
//! file per solution ([`io`]).

pub mod config;
pub mod expr;
pub mod io;
pub mod pipeline;
pub mod report;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse configuration {path}: {message}")]
    ConfigSyntax { path: PathBuf, message: String },
    #[error("expression `{source_text}`: {message}")]
    Expression { source_text: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] multibump_core::Error),
}

impl AppError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
