use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum FpoError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: parse error at {location}: {message}", path.display())]
    Parse {
        path: PathBuf,
        /// `line N` for text input, `byte N` for binary input.
        location: String,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] fpo_core::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("malformed JSON artifact: {0}")]
    Json(#[from] serde_json::Error),
}

impl FpoError {
    /// Process exit code: 1 usage, 2 validation/contract, 3 IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            FpoError::Usage(_) => 1,
            FpoError::Io { .. } => 3,
            FpoError::Parse { .. } | FpoError::Core(_) | FpoError::Invariant(_) | FpoError::Json(_) => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FpoError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = FpoError> = std::result::Result<T, E>;
