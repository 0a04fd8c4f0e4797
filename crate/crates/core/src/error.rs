use thiserror::Error;

/// Errors raised by the simulator and the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter is outside its domain (e.g. a non-positive frequency).
    #[error("domain error: {name} = {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// An expectation value was requested from an empty count quadruple.
    #[error("cannot estimate an expectation value from zero total counts")]
    ZeroCounts,

    /// The least-squares design matrix is singular or the data are insufficient.
    #[error("fit failed: {0}")]
    Fit(String),

    /// Reference normalisation with a zero-contrast reference.
    #[error("reference visibility is zero; cannot normalise")]
    ZeroReferenceVisibility,

    /// Malformed serialised record.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A named field of a configuration or metadata record is missing or invalid.
    #[error("invalid field `{name}`: {reason}")]
    Field { name: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
