use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("matrix has a negative eigenvalue {0:.3e}")]
    NegativeEigenvalue(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("outcome probability {0:.3e} is too small to condition on")]
    ZeroProbability(f64),

    #[error("unknown inequality `{0}`")]
    UnknownInequality(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("Bob index {index} out of range (1..={count})")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("analytic correlators are only available for the singlet")]
    UnsupportedState,

    #[error("no parameters reach the requested target (best residual {0:.3e})")]
    Infeasible(f64),

    #[error("two-Bob sharing is infeasible even at the most favourable state parameter")]
    NeverFeasible,

    #[error("malformed functional definition: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
