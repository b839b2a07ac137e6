//! Crate-wide error type.
//!
//! Validation problems (bad configs, malformed input files) are kept separate
//! from runtime failures (I/O, training divergence) so the CLI can map them to
//! distinct exit codes.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration field failed validation.
    #[error("invalid configuration: field `{field}`: {message}")]
    Config { field: String, message: String },

    /// A file could not be parsed. `line` is 1-based and includes the header.
    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    /// Shapes or vector lengths do not agree.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: String,
        expected: usize,
        actual: usize,
    },

    /// The model has no classification head for the requested task.
    #[error("no head trained for task {task_id}")]
    MissingHead { task_id: usize },

    /// Training produced a non-finite loss.
    #[error("training diverged on task {task_id} (epoch {epoch}, step {step}): loss is not finite")]
    TrainingDiverged {
        task_id: usize,
        epoch: usize,
        step: usize,
    },

    /// Probe training failed while building a pairwise score matrix.
    #[error("order selection failed on task {task_id}: {source}")]
    Selection {
        task_id: usize,
        #[source]
        source: Box<Error>,
    },

    /// Input rejected by a metric or statistic (degenerate or malformed data).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A statistic cannot be computed from the given data.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Evaluation could not run (e.g. empty eval split).
    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::Parse { .. }
                | Error::InvalidInput(_)
                | Error::Degenerate(_)
        )
    }
}
