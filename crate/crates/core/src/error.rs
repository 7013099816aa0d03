use std::path::PathBuf;

use thiserror::Error;

use crate::model::AnamModel;

pub type Result<T> = std::result::Result<T, AnamError>;

/// Coarse error category, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
    Io,
}

#[derive(Debug, Error)]
pub enum AnamError {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    HeaderMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("row {row}, column '{column}': cannot parse '{value}' as a number")]
    ParseNumber {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column '{column}': unknown category level '{value}'")]
    UnknownLevel {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column '{column}': missing value")]
    MissingValue { row: usize, column: String },

    #[error("row {row}: exposure must be strictly positive, got {value}")]
    InvalidExposure { row: usize, value: f64 },

    #[error("row {row}: response must be finite, got {value}")]
    InvalidResponse { row: usize, value: f64 },

    #[error("column '{0}' has zero standard deviation")]
    ZeroVariance(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid model specification: {0}")]
    InvalidModel(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("exposure required by this model but not supplied")]
    MissingExposure,

    #[error("unknown term '{0}'")]
    UnknownTerm(String),

    #[error("input {value} outside lattice range [0, {max}] in dimension {dim}")]
    LatticeRange { dim: usize, value: f64, max: f64 },

    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    #[error("non-finite objective at row {row}")]
    NonFiniteObjective { row: usize },

    #[error("training diverged at epoch {epoch}")]
    Divergence {
        epoch: usize,
        /// Parameters from the last step that produced a finite objective.
        snapshot: Box<AnamModel>,
    },

    #[error("design matrix is rank deficient; enable a ridge penalty")]
    RankDeficient,

    #[error("too many ensemble members diverged ({dropped} of {total})")]
    EnsembleCollapsed { dropped: usize, total: usize },

    #[error("unsupported archive format version {found} (this build reads up to {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
}

impl AnamError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            AnamError::MissingFile(path)
        } else {
            AnamError::Io { path, source }
        }
    }

    pub fn kind(&self) -> ErrorKind {
        use AnamError::*;
        match self {
            MissingFile(_) | Io { .. } => ErrorKind::Io,
            Csv(e) if e.is_io_error() => ErrorKind::Io,
            InvalidConfig(_) | InvalidArgument(_) | UnknownTerm(_) => ErrorKind::Usage,
            NumericOverflow(_)
            | NonFiniteObjective { .. }
            | Divergence { .. }
            | RankDeficient
            | EnsembleCollapsed { .. } => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }
}
