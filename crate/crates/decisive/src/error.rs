use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown state {0}")]
    UnknownState(String),

    #[error("conditioning on a zero-mass set")]
    ZeroMass,

    #[error("set cannot be resolved on the explored frontier: {0}")]
    UnresolvableSet(String),

    #[error("formula contains an unbounded temporal operator: {0}")]
    UnboundedFormula(String),

    #[error("a closure certificate is required: {0}")]
    CertificateRequired(String),

    #[error("atomic propositions of the chain and the automaton differ")]
    AlphabetMismatch,

    #[error("exploration cap of {cap} states exhausted")]
    ResourceExhausted { cap: usize },

    #[error("configuration admits no delay (deadlock)")]
    DeadlockedConfiguration,

    #[error("floating-point resolution exhausted: {0}")]
    ResolutionExhausted(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("{e} (line {}, column {})", e.line(), e.column()))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
