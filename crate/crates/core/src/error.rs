use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input outside the kernel domain: {0}")]
    OutOfDomain(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max |A - A^T| = {max_asymmetry:e})")]
    Asymmetric { max_asymmetry: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("diagonal entry {index} is not positive ({value})")]
    NonPositiveDiagonal { index: usize, value: f64 },

    #[error("diagonal is not sorted in descending order at position {index}")]
    UnsortedDiagonal { index: usize },

    #[error("columns K_2..K_n are rank deficient (smallest singular value {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },

    #[error("matrix is ill-conditioned: gamma_n / gamma_1 = {ratio:e}")]
    IllConditioned { ratio: f64 },

    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("iterate diverged at step {step}: |b_t| = {norm:e}")]
    Diverged { step: usize, norm: f64 },

    #[error("vector must be nonzero")]
    ZeroVector,

    #[error("dominance too weak for the step-size theory: lambda_n - n*tau = {c1}")]
    WeakDominance { c1: f64 },

    #[error("statistical test undefined: {0}")]
    UndefinedTest(String),

    #[error("infeasible step plan: {0}")]
    Infeasible(String),

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
