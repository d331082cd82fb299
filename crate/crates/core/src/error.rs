use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undeclared function `{0}`")]
    UndeclaredFunction(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("variable {0} is not admitted by the context")]
    NotAdmitted(String),
    #[error("derivative whitelist is not closed: {0} is admitted but its predecessor {1} is not")]
    WhitelistNotClosed(String, String),
    #[error("division by a non-monomial expression")]
    DivisorNotMonomial,
    #[error("negative power of a non-monomial expression")]
    NegativePowerOfSum,
    #[error("division by zero")]
    DivisionByZero,
    #[error("unassigned atom in numeric evaluation: {0}")]
    UnassignedAtom(String),
    #[error("antiderivative integrand may depend only on its own variable ({0})")]
    AntiDerivArgs(String),
    #[error("cannot compose opaque atom `{0}` with a map that moves its arguments")]
    OpaqueComposition(String),
    #[error("inconsistent substitution for atom `{0}`")]
    InconsistentBinding(String),
    #[error("vector field is not projectable: {0}")]
    NotProjectable(String),
    #[error("vector field violates the partial-structure preservation conditions: {0}")]
    StructureViolation(String),
    #[error("forms live on different spaces")]
    SpaceMismatch,
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("operation requires truncation order {expected}, context has {got}")]
    WrongOrder { expected: usize, got: usize },
    #[error("{op}: precondition failed: {detail}")]
    Precondition { op: String, detail: String },
    #[error("map inverse fails the composition check at a sample point ({0})")]
    BadInverse(String),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
