use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("incompatible contexts: {0}")]
    Incompatible(String),

    #[error("variable index {index} out of range for phase-space dimension {dim}")]
    BadVariable { index: usize, dim: usize },

    #[error("unknown parameter `{0}`")]
    UnknownParam(String),

    #[error("truncation in `{param}` is too low: {reason}")]
    TruncationTooLow { param: String, reason: String },

    #[error("map is not flow-like: {0}")]
    NotInvertible(String),

    #[error("the star product needs the parameter `h` with a finite truncation")]
    MissingHbar,

    #[error("expected {expected} derivations, got {got}")]
    DerivationCount { expected: usize, got: usize },

    #[error("operator exponent is not nilpotent: {0}")]
    NonNilpotent(String),

    #[error("parameter `{0}` is used by both operands")]
    ParamCollision(String),

    #[error("Hamiltonian must have real coefficients")]
    ComplexHamiltonian,

    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid serialized data: {0}")]
    Format(String),
}
