use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    /// A power computation would exceed the truncation's validity horizon.
    /// The truncated shift is nilpotent while the true shift is not, so this
    /// is a hard error rather than a silent wrong answer.
    #[error("power {requested} exceeds truncation horizon {horizon}")]
    HorizonExceeded { requested: usize, horizon: usize },

    #[error("invalid operator spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The {‖A^n‖/β_n} prefix is not square-summable within the computed
    /// range (the tail keeps growing), so K_f cannot be trusted.
    #[error("square-summability check failed: {0}")]
    SquareSummability(String),

    #[error("operator condition number {cond:.3e} exceeds cap {cap:.3e}")]
    IllConditioned { cond: f64, cap: f64 },

    #[error("insufficient coefficients: need {need}, have {have}")]
    InsufficientPrefix { need: usize, have: usize },

    #[error("inner-factor degree {degree} overflows the {columns}-column budget")]
    DegreeOverflow { degree: usize, columns: usize },

    /// Truncating an infinite coefficient rule against an operator whose
    /// spectral-radius estimate is ≥ 1: the partial sums need not converge.
    #[error("divergence risk: spectral radius estimate {rho:.6} >= 1 with an infinite coefficient rule")]
    Divergence { rho: f64 },

    #[error("exact arithmetic unavailable: {0}")]
    ExactUnavailable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit status: 2 for parse/schema problems, 3 for numerical
    /// precondition failures, 4 reserved for verification failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
