use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("arity mismatch: {left} vs {right} variables")]
    ArityMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for {arity} variables")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("exponent overflow")]
    ExponentOverflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("exponent overflow at position {pos}")]
    ExponentOverflow { pos: usize },
    #[error("invalid polynomial JSON: {0}")]
    Json(String),
}

/// Failures of the analysis pipeline. Each variant names the gate that stopped it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("the zero polynomial has no Newton polytope")]
    ZeroPolynomial,
    #[error("constant polynomial: support has no point besides the origin")]
    ConstantPolynomial,
    #[error("not convenient: {0}")]
    NotConvenient(String),
    #[error("degenerate with respect to its Newton polytope: {0}")]
    Degenerate(String),
    #[error("degeneracy suspected: {0}")]
    DegeneracySuspected(String),
    #[error("exact nondegeneracy check is only available for at most 2 variables (probabilistic only)")]
    ProbabilisticOnly,
    #[error("not in the ideal J(f): residue {0}")]
    NotInIdeal(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
