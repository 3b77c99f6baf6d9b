use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] orthofair_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: column {column:?} is in the schema but not in the header")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: header lists column {column:?} more than once")]
    DuplicateHeader { path: PathBuf, column: String },

    #[error("{path}: row {row}, column {column:?}: {value:?} is not a number")]
    NotANumber {
        path: PathBuf,
        row: u64,
        column: String,
        value: String,
    },

    #[error("{path}: row {row}, column {column:?}: non-finite value {value:?}")]
    NonFiniteCell {
        path: PathBuf,
        row: u64,
        column: String,
        value: String,
    },

    #[error("{path}: row {row} has {got} fields, header has {expected}")]
    RaggedRow {
        path: PathBuf,
        row: u64,
        expected: usize,
        got: usize,
    },

    #[error("{path}: {message}")]
    Predictions { path: PathBuf, message: String },

    #[error("invalid sweep config: {0}")]
    Config(String),

    #[error("model {model}, lambda {lambda}, fold {fold}: {source}")]
    Cell {
        model: String,
        lambda: String,
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Numerical failures (degenerate protected basis, singular systems)
    /// as opposed to bad input data.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Core(e) => e.is_numerical(),
            Error::Cell { source, .. } | Error::Fold { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            3
        } else {
            2
        }
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}

pub(crate) fn json_err(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> Error {
    let path = path.into();
    move |source| Error::Json { path, source }
}

pub(crate) fn csv_err(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> Error {
    let path = path.into();
    move |source| Error::Csv { path, source }
}
