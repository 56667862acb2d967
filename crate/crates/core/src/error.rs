use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QnetError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("not well-named: {first} overlaps {second}")]
    WellNamednessViolation { first: String, second: String },

    #[error("universe too large: more than {cap} graphs")]
    UniverseTooLarge { cap: usize },

    #[error("support escapes the universe: {graph}")]
    SupportEscape { graph: String },

    #[error("operator is not unitary on the universe: {detail}")]
    NotUnitary { detail: String },

    #[error("precondition failed ({kind}): {detail}")]
    PreconditionFailed { kind: String, detail: String },

    #[error("universe mismatch: {0}")]
    UniverseMismatch(String),

    #[error("invalid renaming: {0}")]
    InvalidRenaming(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("norm drift at step {step}: {norm}")]
    NormDrift { step: usize, norm: f64 },

    #[error("internal check disagreement: {0}")]
    Internal(String),

    #[error("io: {0}")]
    Io(String),
}

impl QnetError {
    pub fn precondition(kind: &str, detail: impl Into<String>) -> Self {
        QnetError::PreconditionFailed {
            kind: kind.to_string(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, QnetError>;
