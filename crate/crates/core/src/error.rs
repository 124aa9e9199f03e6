use std::path::PathBuf;

use thiserror::Error;

use crate::bandwidth::IterationRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("kernel singularity at u = {at}: {msg}")]
    Singularity { at: f64, msg: String },

    #[error("numerical error: {0}")]
    Numerical(String),

    /// The fixed-point map returned zero or a non-finite value.
    #[error("fixed-point map degenerate at h = {h}: {msg}")]
    DegenerateMap {
        h: f64,
        msg: String,
        trace: Vec<IterationRecord>,
    },

    #[error("fixed-point iteration diverged: h grew from {from} to {to} in one step")]
    Diverged {
        from: f64,
        to: f64,
        trace: Vec<IterationRecord>,
    },

    #[error("target false-alarm rate {pfa:e} is below the resolvable tail mass {floor:e} of the model")]
    TailResolution { pfa: f64, floor: f64 },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
