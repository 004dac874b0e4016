use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GlrError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index out of range: {what} {index} (bound {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite loss encountered during optimization (check input scaling)")]
    NonFiniteLoss,

    #[error("{method} did not converge after {iterations} iterations")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
    },

    #[error("class {class} has {size} members, fewer than k={k}")]
    ClassTooSmall { class: usize, size: usize, k: usize },

    #[error("count mismatch for {field}: meta.json says {expected}, loaded {found}")]
    CountMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("checksum mismatch: manifest {expected}, computed {found}")]
    ChecksumMismatch { expected: String, found: String },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("missing file: {0}")]
    MissingFile(PathBuf),

    #[error("unknown model kind `{0}` (valid kinds: glr, lr_a, lr_x, diffusion_a, diffusion_x, knn_spectral_a, knn_spectral_x)")]
    UnknownModel(String),

    #[error("no dataset satisfies the high feature homophily condition")]
    NoQualifyingDatasets,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GlrError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GlrError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, GlrError>;
