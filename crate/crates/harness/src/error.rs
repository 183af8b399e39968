use std::path::{Path, PathBuf};

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] gaspace::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown experiment `{name}` (known: {known})")]
    UnknownExperiment { name: String, known: String },
    #[error("bad parameters for `{kind}`: {reason}")]
    Params { kind: String, reason: String },
    #[error("table: {0}")]
    Table(String),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn params(kind: &str, reason: impl Into<String>) -> Self {
        HarnessError::Params {
            kind: kind.to_owned(),
            reason: reason.into(),
        }
    }
}
