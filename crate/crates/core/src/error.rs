//! Crate-wide error type.

use thiserror::Error;

use crate::corpus::{AnnotatorId, ArgumentId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("duplicate annotation by '{annotator}' on '{argument}'")]
    DuplicateAnnotation {
        annotator: AnnotatorId,
        argument: ArgumentId,
    },
    #[error("duplicate argument id '{0}'")]
    DuplicateArgument(ArgumentId),
    #[error("unknown argument '{0}'")]
    UnknownArgument(ArgumentId),
    #[error("missing score for argument '{0}'")]
    MissingScore(ArgumentId),
    #[error("missing pairwise gold for pair ('{first}', '{second}')")]
    MissingGold {
        first: ArgumentId,
        second: ArgumentId,
    },
    #[error("predictions do not cover gold; {} missing ids, first: {}", .0.len(), preview(.0))]
    CoverageGap(Vec<ArgumentId>),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("kappa undefined: {0}")]
    UndefinedKappa(String),
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
    #[error("infeasible correlation triple: {0}")]
    InfeasibleCorrelations(String),
    #[error("degenerate weights for argument '{0}'")]
    DegenerateWeights(ArgumentId),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

fn preview(ids: &[ArgumentId]) -> String {
    let shown: Vec<&str> = ids.iter().take(5).map(|id| id.as_str()).collect();
    shown.join(", ")
}

impl Error {
    /// Errors caused by numeric degeneracy rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::UndefinedKappa(_)
                | Error::UndefinedCorrelation(_)
                | Error::InfeasibleCorrelations(_)
                | Error::DegenerateWeights(_)
                | Error::Numerical(_)
        )
    }

    /// Errors caused by the surrounding system (filesystem, encoding).
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Csv(_))
    }
}
