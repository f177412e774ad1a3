use bayeslens::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("signature error: {0}")]
    Signature(String),
    #[error("{0}")]
    EmptySupport(String),
    #[error("step {step}: {message}")]
    UnsupportedObservation { step: usize, message: String },
    /// Carries the reports so they are still printed.
    #[error("{count} law(s) failed")]
    LawsFailed {
        count: usize,
        reports: serde_json::Value,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::LawsFailed { .. } => 1,
            CliError::Validation(_) => 2,
            CliError::Signature(_) => 3,
            CliError::EmptySupport(_) => 4,
            CliError::UnsupportedObservation { .. } => 5,
        }
    }

    /// Attach a filtering step index to observation failures.
    pub fn at_step(e: Error, step: usize) -> Self {
        match e {
            Error::UnsupportedObservation { .. } => CliError::UnsupportedObservation {
                step,
                message: e.to_string(),
            },
            other => CliError::from(other),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DomainMismatch { .. } | Error::InstanceMismatch { .. } | Error::SignatureMismatch(_) => {
                CliError::Signature(e.to_string())
            }
            Error::EmptySupport { .. } => CliError::EmptySupport(e.to_string()),
            Error::UnsupportedObservation { .. } => CliError::UnsupportedObservation {
                step: 0,
                message: e.to_string(),
            },
            _ => CliError::Validation(e.to_string()),
        }
    }
}
