use thiserror::Error;

#[derive(Error, Debug)]
pub enum EngineError {
    #[error("division by zero in the coefficient field")]
    DivisionByZero,

    #[error("truncation degrees differ: {0} vs {1}")]
    TruncationMismatch(u32, u32),

    #[error("composition target has a nonzero constant term")]
    NonzeroConstantTerm,

    #[error("vector field order {0} is below the Exp/Log domain (order >= 2 required)")]
    OrderTooLow(u32),

    #[error("diffeomorphism is not tangent to the identity")]
    NotTangentToIdentity,

    #[error("linear part is not invertible")]
    SingularLinearPart,

    #[error("{0}")]
    Domain(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
