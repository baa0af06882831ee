use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("generator index {0} outside alphabet of size {1}")]
    GenOutOfRange(u32, usize),

    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("corrupt certificate at step {step}: {reason}")]
    CorruptCertificate { step: usize, reason: String },

    #[error("exponent overflow")]
    Overflow,

    #[error("presentation has not passed the C'(1/6) check; Dehn's algorithm refused")]
    UnverifiedPresentation,

    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("escalation cap reached: {0}")]
    EscalationCap(String),

    #[error("needs van Kampen data: {0}")]
    NeedsVanKampen(String),

    #[error("certification failed: {0}")]
    CertificationFailed(String),

    #[error("quotient presentation is not flagged aspherical; identity sequences are not supported")]
    NonAspherical,

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
