use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero polynomial where a nonzero one is required")]
    ZeroPolynomial,
    #[error("interval endpoint {0} is a root; perturb it")]
    EndpointIsRoot(String),
    #[error("empty interval: lo must be strictly below hi")]
    EmptyInterval,
    #[error("operands live in different number fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not invertible: minimal polynomial is reducible")]
    NonInvertible,
    #[error("expected exactly one real root in window, found {0}")]
    RootCount(usize),
    #[error("precision budget exhausted at 2^-{0}")]
    PrecisionExhausted(u64),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("parameter constraint violated: {0}")]
    Constraint(String),
    #[error("no expected table is known for {0}")]
    NoTable(String),
    #[error("expected a tuple of length {expected}, got {found}")]
    TupleLength { expected: usize, found: usize },
    #[error("digit does not fit in 64 bits")]
    DigitOverflow,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
