use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dataset needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("dataset needs at least 2 columns, got {0}")]
    TooFewColumns(usize),
    #[error("dataset must have exactly one outcome column, found {0}")]
    OutcomeCount(usize),
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("non-finite value in column {column:?} at row {row}")]
    NonFinite { column: String, row: usize },
    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("column {0:?} is still categorical; encode it first")]
    NotNumeric(String),
    #[error("column {0:?} is not categorical")]
    NotCategorical(String),
    #[error("categorical column {0:?} has a single category")]
    ConstantCategorical(String),
    #[error("categorical column {column:?} has {categories} categories for {rows} rows")]
    TooManyCategories {
        column: String,
        categories: usize,
        rows: usize,
    },
    #[error("outcome column {column:?} has {categories} categories; only binary outcomes can be encoded")]
    OutcomeNotBinary { column: String, categories: usize },
    #[error("dataset must be centered first")]
    NotCentered,
    #[error("no protected columns")]
    NoProtectedColumns,
    #[error("all protected columns are degenerate (basis rank 0)")]
    DegenerateProtected,
    #[error("dimension mismatch: basis has {expected} rows, dataset has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("lambda must lie in [0, 1], got {0}")]
    LambdaOutOfRange(f64),
    #[error("interpolation needs the lambda = 0 view, got lambda = {0}")]
    NotBaseView(f64),
    #[error("design is rank deficient; dependent columns: {columns:?}")]
    RankDeficient { columns: Vec<String> },
    #[error("{0} must be binary (0/1)")]
    NonBinary(&'static str),
    #[error("zero variance")]
    ZeroVariance,
    #[error("protected group {0} is empty")]
    EmptyGroup(u8),
    #[error("subgroup {0} is empty")]
    EmptyCell(&'static str),
    #[error("column mismatch: model trained on {expected:?}, got {got:?}")]
    ColumnMismatch {
        expected: Vec<String>,
        got: Vec<String>,
    },
    #[error("invalid split plan: {0}")]
    InvalidSplitPlan(&'static str),
    #[error("split {split}: {partition} partition is empty")]
    EmptyPartition {
        split: usize,
        partition: &'static str,
    },
    #[error("need at least {needed} rows for {folds} folds, got {got}")]
    TooFewRowsForFolds {
        needed: usize,
        folds: usize,
        got: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateProtected | Error::RankDeficient { .. } | Error::NotPositiveDefinite
        )
    }
}
