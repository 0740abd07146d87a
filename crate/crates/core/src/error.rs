use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("enumeration capacity exceeded: {0}")]
    Capacity(String),

    #[error("maxent fit diverged at iteration {iteration} (gradient norm {grad_norm:.3e})")]
    Divergence { iteration: usize, grad_norm: f64 },

    #[error("lasso did not converge after {sweeps} sweeps (objective gap estimate {gap:.3e})")]
    Convergence { sweeps: usize, gap: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("trial {trial}, task {task}: {source}")]
    Trial {
        trial: usize,
        task: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
