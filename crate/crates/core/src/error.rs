use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no candidate distillation cost reaches the target scheduled cost {target}")]
    NoEffectiveCost { target: f64 },

    #[error("no odd pool distance can satisfy the error budget {budget} (magic-state error alone is {floor})")]
    BudgetExhausted { budget: f64, floor: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// I/O-class errors map to a different process exit status than
    /// validation errors.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Csv { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
