use thiserror::Error;

/// Errors produced anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// The feature table header is missing a column, names an unknown one,
    /// or repeats one.
    #[error("schema error: {message} `{column}`")]
    Schema { column: String, message: &'static str },

    /// A data row could not be accepted.
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("dataset contains no samples")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A numeric argument falls outside the domain of the operation.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The input violates a precondition the caller was responsible for.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    EigenNoConvergence { sweeps: usize, residual: f64 },

    #[error("SVR solver stopped after {steps} coordinate steps with KKT residual {residual:e}")]
    SolverNoConvergence { steps: usize, residual: f64 },

    #[error("truncated frame at byte offset {offset}: {available} of {frame_size} bytes present")]
    TruncatedFrame {
        offset: u64,
        available: usize,
        frame_size: usize,
    },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported model format version {0}")]
    FormatVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
