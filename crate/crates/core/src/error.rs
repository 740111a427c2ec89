use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("label error: {0}")]
    Label(String),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("split error: {0}")]
    Split(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("every candidate feature is constant on the weighted rows")]
    DegenerateFeature,

    #[error("no value of alpha selected a non-empty ensemble")]
    DegenerateSelection,

    #[error("candidate pool error: {0}")]
    Pool(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that arise from the training data or the pool rather
    /// than from the caller's input (configuration, schema, files).
    pub fn is_training_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::DegenerateFeature | Error::DegenerateSelection | Error::Pool(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
