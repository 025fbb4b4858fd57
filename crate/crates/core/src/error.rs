use std::path::PathBuf;

use thiserror::Error;

use crate::lattice::Site;

#[derive(Debug, Error)]
pub enum Error {
    #[error("frozen cluster: total activity is zero")]
    FrozenCluster,

    #[error("rejection overflow: no successful attempt after {attempts} tries")]
    RejectionOverflow { attempts: u64 },

    #[error("line of height {k} is not above the cluster (cluster height {height})")]
    LineNotAbove { k: i64, height: i64 },

    #[error("empty cluster")]
    EmptyCluster,

    #[error("window breach: red site {site} within 2 of the lateral boundary of window {window}")]
    WindowBreach { site: Site, window: i64 },

    #[error("too few sample points: {got} (need at least {need})")]
    TooFewPoints { got: usize, need: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
