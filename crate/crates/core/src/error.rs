use thiserror::Error;

#[derive(Debug, Error)]
pub enum MotError {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("measures are not in extended convex order")]
    NotInExtendedOrder,
    #[error("measures are not in convex order")]
    NotInConvexOrder,
    #[error("total masses differ")]
    MassMismatch,
    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),
    #[error("invalid rival coupling: {0}")]
    InvalidRival(String),
    #[error("unsupported cost: {0}")]
    UnsupportedCost(String),
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),
    #[error("experiment failed: {0}")]
    Experiment(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json error at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
}

impl From<serde_json::Error> for MotError {
    fn from(e: serde_json::Error) -> Self {
        MotError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T, E = MotError> = std::result::Result<T, E>;
