use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{}: missing column `{column}`", path.display())]
    MissingColumn { path: PathBuf, column: String },
    #[error("{}: line {line}: cannot parse date `{value}`", path.display())]
    BadDate { path: PathBuf, line: u64, value: String },
    #[error("{}: date {date} appears more than once", path.display())]
    DuplicateDate { path: PathBuf, date: chrono::NaiveDate },
    #[error("{}: no usable rows", path.display())]
    NoUsableRows { path: PathBuf },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("malformed report: {0}")]
    Report(String),
    #[error(transparent)]
    Core(#[from] oilcast_core::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit status: 2 for configuration problems, 1 for everything
    /// that fails while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 2,
            _ => 1,
        }
    }
}
