use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed LP: {0}")]
    MalformedProblem(String),

    #[error("simplex iteration limit ({limit}) exceeded in phase {phase}")]
    IterationLimitExceeded { phase: u8, limit: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("Gram matrix is {rows}x{rows} but {labels} labels were given")]
    GramShapeMismatch { rows: usize, labels: usize },

    #[error("training data must contain both classes")]
    SingleClass,

    #[error("hard-margin problem is infeasible: data are not linearly separable")]
    HardMarginInfeasible,

    #[error("solver did not reach an optimum: {0}")]
    SolverFailure(String),

    #[error("LP solution is not optimal ({0})")]
    NotOptimal(String),

    #[error("weight vector is zero")]
    ZeroWeight,

    #[error("augmented weight vector is zero")]
    ZeroVector,

    #[error("sample {index} lies on the hyperplane")]
    DegenerateMargin { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, {field}: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: feature index must be >= 1")]
    NonpositiveIndex { line: usize },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("too few samples: {0}")]
    TooFewSamples(String),

    #[error("unsupported model file: {0}")]
    VersionMismatch(String),

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    /// Strips fold annotations to reach the underlying cause.
    pub fn root(&self) -> &Error {
        match self {
            Error::Fold { source, .. } => source.root(),
            other => other,
        }
    }
}
