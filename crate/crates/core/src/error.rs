//! Crate-wide error type.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("missing required column \"{0}\"")]
    MissingColumn(String),

    #[error("duplicate prompt id \"{0}\"")]
    DuplicatePromptId(String),

    #[error("empty corpus: no data rows")]
    EmptyCorpus,

    #[error("prompt {id}: field \"{field}\" must be non-empty")]
    EmptyPromptField { id: String, field: String },

    #[error("sample size {k} exceeds corpus size {n}")]
    SampleTooLarge { k: usize, n: usize },

    #[error("sample size must be at least 1")]
    SampleZero,

    #[error("worker count must be at least 1")]
    NoWorkers,

    #[error("backend failure: {0}")]
    BackendFailure(String),

    #[error("backend timed out after {0} ms")]
    BackendTimeout(u64),

    #[error("malformed backend response: {0}")]
    MalformedResponse(String),

    #[error("unsupported backend endpoint \"{0}\"")]
    UnknownEndpoint(String),

    #[error("invalid rule registry: {0}")]
    RegistryInvalid(String),

    #[error("invalid knowledge base: {0}")]
    KbInvalid(String),

    #[error("invalid episode: {0}")]
    EpisodeInvalid(String),

    #[error("inconsistent counters: {0}")]
    CounterInconsistency(String),

    #[error("session is closed")]
    SessionClosed,

    #[error("anova requires at least 2 groups")]
    TooFewGroups,

    #[error("group \"{0}\" has no observations")]
    EmptyGroup(String),

    #[error("anova undefined: zero between-group and within-group variance")]
    AnovaUndefined,

    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("loc must be at least 1")]
    ZeroLoc,

    #[error("invalid run config: {0}")]
    ConfigInvalid(String),

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by bad inputs (files, config, parameters)
    /// rather than failures while running; the CLI maps these to exit 1.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::BackendFailure(_) | Error::BackendTimeout(_) | Error::MalformedResponse(_) | Error::Write { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
