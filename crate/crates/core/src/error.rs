use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    /// The constraint system disagrees with the model (e.g. an infeasible BCE set).
    #[error("model error: {0}")]
    Model(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("numerical failure: {msg} (gap {gap:e})")]
    Numeric { msg: String, gap: f64 },
    #[error("iteration did not converge: {msg} (last residual {residual:e})")]
    Iteration { msg: String, residual: f64 },
    #[error("empty covariate cell: {0}")]
    EmptyCell(String),
    #[error("sparse data: {0}")]
    SparseData(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("baseline chain is not ordered: {0}")]
    Ordering(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
