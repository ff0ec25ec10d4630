use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("protocol z = {0} is outside 1..=7")]
    Protocol(u32),

    #[error("invalid stabilizer code: {0}")]
    Code(String),

    #[error("invalid problem instance: {0}")]
    Instance(String),

    #[error("no feasible allocation found after {tries} tries ({stats})")]
    NotFound { tries: usize, stats: String },

    #[error("exhaustive search too large: {0}")]
    CostGuard(String),

    #[error("no feasible point on the search grid")]
    Infeasible,

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }
}
