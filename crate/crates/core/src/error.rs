use std::fmt;

use serde::Serialize;

use crate::model::ValidationReport;

/// Failure report for a numeric routine that did not reach its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonConvergence {
    pub routine: String,
    pub achieved: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl fmt::Display for NonConvergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} did not converge (achieved {:e}, tolerance {:e}): {}",
            self.routine, self.achieved, self.tolerance, self.detail
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("model failed validation: {0}")]
    Validation(ValidationReport),
    #[error("{0}")]
    Parse(crate::dsl::ParseErrors),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("measure lives on model {found}, expected {expected}")]
    ModelMismatch { expected: String, found: String },
    #[error("lift undefined: nonzero mass at collapse point {0}")]
    LiftUndefined(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("{0}")]
    NonConvergence(NonConvergence),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 2,
            Error::NonConvergence(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
