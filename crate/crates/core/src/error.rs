use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The variants fall into four classes (see [`Error::class`]) which the
/// command-line driver maps onto process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("estimate undefined: {0}")]
    UndefinedEstimate(String),

    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}: byte offset {offset}: {reason}")]
    Format {
        path: PathBuf,
        offset: u64,
        reason: String,
    },

    #[error("{path}: row {row}: negative attenuation {value}")]
    NegativeAttenuation {
        path: PathBuf,
        row: usize,
        value: f64,
    },

    #[error("{path}: table covers [{start}, {end}] um but grid needs {needed} um")]
    CoverageGap {
        path: PathBuf,
        start: f64,
        end: f64,
        needed: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse error class, used for exit codes and the one-line stderr tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    ParseIo,
    Numeric,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Validation => 2,
            ErrorClass::ParseIo => 3,
            ErrorClass::Numeric => 4,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ErrorClass::Validation => "validation",
            ErrorClass::ParseIo => "parse-io",
            ErrorClass::Numeric => "numeric",
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Domain(_)
            | Error::GridMismatch(_)
            | Error::Precondition(_)
            | Error::InvalidField { .. } => ErrorClass::Validation,
            Error::UndefinedEstimate(_) | Error::NonFiniteLoss { .. } => ErrorClass::Numeric,
            Error::Parse { .. }
            | Error::Format { .. }
            | Error::NegativeAttenuation { .. }
            | Error::CoverageGap { .. }
            | Error::Io { .. } => ErrorClass::ParseIo,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
