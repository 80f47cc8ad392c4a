use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {dim}: need at least {min}")]
    InvalidDimension { dim: usize, min: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("state norm {0} differs from 1")]
    NotNormalized(f64),

    #[error("trace {0} differs from 1")]
    InvalidTrace(f64),

    #[error("not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("POVM effects do not sum to identity (max deviation {0:e})")]
    Incomplete(f64),

    #[error("POVM has no effects")]
    EmptyPovm,

    #[error("angle {name}[{index}] = {value} outside {range}")]
    AngleOutOfRange {
        name: &'static str,
        index: usize,
        value: f64,
        range: &'static str,
    },

    #[error("batch must contain at least one sample")]
    EmptyBatch,

    #[error("POVMs cannot be paired: {0}")]
    Pairing(String),

    #[error("state is not maximally entangled (singular values {0:?})")]
    NotMaximallyEntangled(Vec<f64>),

    #[error("remap kernel is not proportional to a unitary (deviation {0:e})")]
    NotProportionalToUnitary(f64),

    #[error("unsupported outcome count {got}, expected {expected}")]
    UnsupportedOutcomeCount { got: usize, expected: usize },

    #[error("Bell states require local dimension 2, got {0}")]
    BellDimension(usize),

    #[error("numerical inconsistency: {0}")]
    Numerical(String),

    #[error("bound violated: {value} outside [{lower}, {upper}]")]
    BoundViolation { value: f64, lower: f64, upper: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
