use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: ({0}, {1}) vs ({2}, {3})")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("element is not in the free Lie algebra (defect {0:e})")]
    NotLie(f64),

    #[error("element is not group-like (shuffle defect {0:e})")]
    NotGroupLike(f64),

    #[error("state became non-finite in cell {cell} [{start}, {end}]")]
    Explosion { cell: usize, start: f64, end: f64 },

    #[error("refinement did not converge to {tol:e}; gap history {gaps:?}")]
    NotConverged { tol: f64, gaps: Vec<f64> },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
