use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands from different groups, malformed normal forms.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {what} (cap {cap}){}", attained.as_ref().map(|a| format!(", attained {a}")).unwrap_or_default())]
    Resource {
        what: String,
        cap: usize,
        attained: Option<String>,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An internal consistency check failed; indicates a bad homomorphism or a bug.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn resource(what: impl Into<String>, cap: usize) -> Self {
        Error::Resource {
            what: what.into(),
            cap,
            attained: None,
        }
    }
}
