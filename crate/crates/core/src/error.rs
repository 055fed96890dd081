use thiserror::Error;

use crate::series::Unit;

pub type Result<T> = std::result::Result<T, Error>;

/// Reason a CSV record was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("file contains no records")]
    Empty,
    #[error("duplicate year {0}")]
    DuplicateYear(i32),
    #[error("gap in years: {missing} is missing")]
    Gap { missing: i32 },
    #[error("unparsable number {0:?}")]
    BadNumber(String),
    #[error("malformed record {0:?}, expected `year,value`")]
    BadRecord(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("insufficient data: need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("value {value} in {year} is not strictly positive, logarithm undefined")]
    Domain { year: i32, value: f64 },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },

    #[error("unsupported unit conversion from {from} to {to}")]
    Unit { from: Unit, to: Unit },

    #[error("rank-deficient normal equations: {0}")]
    RankDeficient(String),

    #[error("degenerate model: {0}")]
    Degenerate(String),

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}: {source}")]
    InFile { path: String, source: Box<Error> },
}

impl Error {
    /// Stable machine-readable name of the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InsufficientData { .. } => "insufficient_data",
            Error::Domain { .. } => "domain",
            Error::Alignment(_) => "alignment",
            Error::Parse { .. } => "parse",
            Error::Unit { .. } => "unit",
            Error::RankDeficient(_) => "rank_deficient",
            Error::Degenerate(_) => "degenerate",
            Error::InvalidSeries(_) => "invalid_series",
            Error::Config(_) => "config",
            Error::Manifest(_) => "manifest",
            Error::Io { .. } => "io",
            Error::InFile { source, .. } => source.kind(),
        }
    }

    pub(crate) fn in_file(self, path: impl Into<String>) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
