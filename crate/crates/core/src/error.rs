use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("frame mismatch: operands are expressed in different frames")]
    FrameMismatch,
    #[error("symmetry violation: {0}")]
    SymmetryViolation(String),
    #[error("frame singular: {0}")]
    FrameSingular(String),
    #[error("not positive: {0}")]
    NotPositive(String),
    #[error("not normalized: {0}")]
    NotNormalized(String),
    #[error("not hermitian: {0}")]
    NotHermitian(String),
    #[error("not trace preserving: {0}")]
    NotTracePreserving(String),
    #[error("not pseudostochastic: {0}")]
    NotPseudoStochastic(String),
    #[error("not generator shaped: {0}")]
    NotGeneratorShaped(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("not unitary: {0}")]
    NotUnitary(String),
    #[error("target out of range: {0}")]
    TargetOutOfRange(String),
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),
    #[error("bracket not found: {0}")]
    BracketNotFound(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Stable variant name, used by the CLI for structured error output.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::FrameMismatch => "FrameMismatch",
            Error::SymmetryViolation(_) => "SymmetryViolation",
            Error::FrameSingular(_) => "FrameSingular",
            Error::NotPositive(_) => "NotPositive",
            Error::NotNormalized(_) => "NotNormalized",
            Error::NotHermitian(_) => "NotHermitian",
            Error::NotTracePreserving(_) => "NotTracePreserving",
            Error::NotPseudoStochastic(_) => "NotPseudoStochastic",
            Error::NotGeneratorShaped(_) => "NotGeneratorShaped",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::NotUnitary(_) => "NotUnitary",
            Error::TargetOutOfRange(_) => "TargetOutOfRange",
            Error::InfeasibleParameters(_) => "InfeasibleParameters",
            Error::BracketNotFound(_) => "BracketNotFound",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Internal(_) => "Internal",
        }
    }

    /// True for errors caused by the numerical procedure rather than by the input.
    pub fn is_computational(&self) -> bool {
        matches!(self, Error::BracketNotFound(_) | Error::Internal(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
