//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation undefined on an empty activation set: {0}")]
    EmptySet(&'static str),

    #[error("exact clique solver is capped at {cap} vertices but the graph has {got}; use the greedy variant or raise the cap")]
    CliqueSizeCap { cap: usize, got: usize },

    #[error("brute-force subset scan is capped at {cap} links, instance has {got}")]
    BruteForceCap { cap: usize, got: usize },

    #[error("enumeration budget exceeded: C({m},{s}) ~ exp({ln_count:.2}) subsets, budget {budget}")]
    EnumerationBudget {
        m: usize,
        s: usize,
        ln_count: f64,
        budget: u64,
    },

    #[error("root finding failed after {expansions} bracket expansions: {detail}")]
    NoConvergence { expansions: usize, detail: String },

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("noise-limited regime unreachable: {0}")]
    Regime(String),

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// True for errors that should map to the CLI's config exit code.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::InvalidArgument(_))
    }
}
