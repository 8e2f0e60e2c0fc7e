use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("non-finite amplitude at index {0}")]
    NonFinite(usize),

    #[error("postselection singular: |<f|i>| or success amplitude = {magnitude:.3e}")]
    PostselectionSingular { magnitude: f64 },

    #[error("projectors do not sum to the identity (Frobenius gap {gap:.3e})")]
    IncompleteDecomposition { gap: f64 },

    #[error("transmission {0} outside [0, 1]")]
    InvalidTransmission(f64),

    #[error("unsupported circuit shape: {0}")]
    UnsupportedShape(String),

    #[error("measurement strength is zero; readout is 0/0")]
    StrengthZero,

    #[error("measurement strength {0} outside (0, 1]")]
    InvalidStrength(f64),

    #[error("marking angle {0} outside [0, pi/4]")]
    InvalidAngle(f64),

    #[error("strength grid must be strictly increasing")]
    UnsortedGrid,

    #[error("insufficient data: need {needed} distinct samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("target weak values violate the sum rule (residual {residual:.3e})")]
    SumRuleViolation { residual: f64 },

    #[error("all target weak values are zero")]
    DegenerateTargets,

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("visibility {0} outside [0, 1]")]
    InvalidVisibility(f64),

    #[error("operator is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid scenario file: {0}")]
    Format(String),
}
