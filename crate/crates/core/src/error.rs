use thiserror::Error;

/// Failures of the impartial and economical checkers. Types and expressions
/// are carried pre-rendered in concrete syntax.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("type mismatch: expected {expected}, found {found} for {expr}")]
    TypeMismatch { expected: String, found: String, expr: String },
    #[error("value restriction: {rule} needs a value, but {expr} is not known to be one")]
    ValueRestriction { rule: String, expr: String },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("unbound fixed-point variable {0}")]
    UnboundFixVariable(String),
    #[error("unbound evaluation order {0}")]
    UnboundEvalOrder(String),
    #[error("ill-formed type {0}")]
    IllFormedType(String),
    #[error("recursive type {0} is not guarded by a connective")]
    GuardednessViolation(String),
    #[error("cannot synthesize a type for {0}; add an annotation")]
    CannotSynthesize(String),
    #[error("{expr} has type {found}, which is not a {want} type")]
    ExposeFailed { want: String, found: String, expr: String },
    #[error("{expr} does not check against {expected}")]
    NoRule { expr: String, expected: String },
    #[error("recursive type unrolled more than {0} times")]
    UnrollLimit(usize),
}

/// Failures of the elaboration into the target language.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ElabError {
    #[error("evaluation-order variable {0} in the context; elaboration needs closed orders")]
    EvalOrderVarInContext(String),
    #[error("instantiation at {0} is not a closed evaluation order")]
    InstantiationNotClosed(String),
    #[error("re-checking an instance failed: {0}")]
    InstanceFailed(TypeError),
    #[error("malformed derivation at rule {0}")]
    MalformedDerivation(String),
}
