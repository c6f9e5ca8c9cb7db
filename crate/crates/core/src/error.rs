use thiserror::Error;

use crate::space::Variant;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed config space: {0}")]
    MalformedSpace(String),
    #[error("duplicate module name `{0}`")]
    DuplicateModule(String),
    #[error("duplicate option `{option}` in module `{module}`")]
    DuplicateOption { module: String, option: String },
    #[error("module `{0}` has an empty option list")]
    EmptyOptions(String),
    #[error("module `{module}` has {count} options, at most {max} are supported")]
    TooManyOptions {
        module: String,
        count: usize,
        max: usize,
    },
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("unknown option `{option}` for module `{module}`")]
    UnknownOption { module: String, option: String },
    #[error("missing module `{0}`")]
    MissingModule(String),
    #[error("invalid variant: {0}")]
    InvalidVariant(String),

    #[error("csv schema mismatch: {0}")]
    Schema(String),
    #[error("record {record}: {message}")]
    Record { record: u64, message: String },
    #[error("negative precision {value} in record {record}")]
    NegativePrecision { record: u64, value: f64 },
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("budget {budget} precedes the first record at {first} evaluations")]
    BudgetBeforeFirstRecord { budget: u64, first: u64 },
    #[error("empty run group")]
    EmptyGroup,
    #[error("{count} missing cells, e.g. {preview}")]
    MissingCells { count: usize, preview: String },
    #[error("duplicate variant {0:?} in dataset")]
    DuplicateVariant(Variant),
    #[error("incomplete factorial coverage: {} missing variants, e.g. {:?}", .missing.len(), .missing.first())]
    IncompleteCoverage { missing: Vec<Variant> },
    #[error("space with {0} variants exceeds the exhaustive-enumeration limit")]
    SpaceTooLarge(usize),
    #[error("no rows matched")]
    EmptySlice,
    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid fit parameters: {0}")]
    InvalidParams(String),
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("max order {max_order} outside 1..={n_modules}")]
    InvalidOrder { max_order: usize, n_modules: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("malformed truth spec: {0}")]
    MalformedTruth(String),
    #[error("malformed effects file: {0}")]
    MalformedEffects(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
