use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

/// Failures surfaced by the learning primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A learner broke the query protocol: wrote into a closed round or
    /// exceeded its declared parallel budget.
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("weak learner contract violated: best achievable error {best_error} exceeds {threshold}")]
    WeakLearnerContractViolation { best_error: f64, threshold: f64 },

    /// The sampled booster's re-draw loop gave up.
    #[error("round {round}: no acceptable hypothesis after {redraws} re-draws")]
    TerminationFailure { round: usize, redraws: usize },

    /// Reading or writing experiment artifacts failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl LabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidInput(msg.into())
    }

    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        LabError::ProtocolViolation(msg.into())
    }

    /// Short, stable tag used in result tables.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::InvalidInput(_) => "InvalidInput",
            LabError::ProtocolViolation(_) => "ProtocolViolation",
            LabError::WeakLearnerContractViolation { .. } => "WeakLearnerContractViolation",
            LabError::TerminationFailure { .. } => "TerminationFailure",
            LabError::Io(_) => "Io",
        }
    }
}
