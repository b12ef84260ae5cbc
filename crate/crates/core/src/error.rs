//! Error types shared by all modules.

use std::path::PathBuf;

use thiserror::Error;

use crate::generate::EmFit;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A probability vector, table or configuration failed validation.
    #[error("validation failed: {reason}")]
    Validation { reason: String },

    /// Validation failure located inside an observation table.
    #[error("validation failed at row {row}, node {node}: {reason}")]
    RowValidation {
        row: usize,
        node: String,
        reason: String,
    },

    /// Two operands do not agree on a dimension.
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// An effect state has zero marginal probability, so Bayes reversal
    /// would divide by zero.
    #[error("effect state {state:?} has zero marginal probability; cannot reverse the table")]
    DegenerateMarginal { state: String },

    /// The normal matrix X'X of the least-squares system is singular.
    #[error("normal matrix X'X is singular; observations do not span the cause states (use a ridge > 0)")]
    SingularMatrix,

    /// Counting methods need hard evidence unless rounding is requested.
    #[error("row {row} of node {node} is soft evidence; enable rounding to count it")]
    SoftEvidence { row: usize, node: String },

    /// An iterative fit ran out of iterations.
    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },

    /// EM hit its iteration cap; the best table found so far is carried
    /// along so callers can still inspect or use it.
    #[error("EM did not meet the convergence threshold within {} iterations", .0.iterations)]
    EmNonConvergence(Box<EmFit>),

    /// A predictor handed to column extraction produced an unusable output.
    #[error("predictor output for cause state {column} is not usable: {reason}")]
    PredictorRange { column: usize, reason: String },

    /// A file could not be parsed.
    #[error("parse error in {} line {line}: {reason}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    /// A CSV header does not match the expected schema.
    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    Schema { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(reason: impl Into<String>) -> Self {
        Error::Validation {
            reason: reason.into(),
        }
    }
}
