use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain mismatch: codomain {left} does not match domain {right}")]
    DomainMismatch { left: String, right: String },
    #[error("instance mismatch: cannot combine {left} and {right} morphisms")]
    InstanceMismatch {
        left: &'static str,
        right: &'static str,
    },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("object {0} is not a product of the requested factors")]
    NotAProduct(String),
    #[error("index {index} out of range for object of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("state has empty support at tolerance {tol}")]
    EmptySupport { tol: f64 },
    #[error("observation {observation} has predictive mass {mass} at or below tolerance")]
    UnsupportedObservation { observation: String, mass: f64 },
    #[error("invalid {what}: {detail}")]
    Validation { what: String, detail: String },
    #[error("unknown law `{0}`")]
    UnknownLaw(String),
}

impl Error {
    pub(crate) fn validation(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Validation {
            what: what.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
