use num_complex::Complex64 as C64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, AmtError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmtError {
    #[error("matrix is not Hermitian: max|A - A^H| = {deviation:e} (scale {scale:e})")]
    NotHermitian { deviation: f64, scale: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("defective eigenvalue cluster at {eigenvalue} (algebraic {algebraic}, geometric {geometric})")]
    Defective {
        eigenvalue: C64,
        algebraic: usize,
        geometric: usize,
    },

    #[error("eigen-decomposition failed to converge")]
    NoConvergence,

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("adaptive step underflow at t = {t} (step {step:e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("norm drift {drift:e} exceeds limit at t = {t} (step {step:e})")]
    NormDrift { t: f64, drift: f64, step: f64 },

    #[error("trace drift {drift:e} exceeds limit at t = {t}")]
    TraceDrift { t: f64, drift: f64 },

    #[error("positivity violated at t = {t}: minimum eigenvalue {min_eigenvalue:e}")]
    Positivity { t: f64, min_eigenvalue: f64 },

    #[error("period undefined for lambda = {lambda}")]
    PeriodUndefined { lambda: f64 },

    #[error("mixing angle undefined: generalized Rabi frequency vanishes")]
    DegenerateRabi,

    #[error(
        "degenerate Floquet multipliers (separation {separation:e}); branch continuation ambiguous"
    )]
    DegenerateFloquet { separation: f64 },

    #[error("mode crossing at t = {t}: quasienergy gap {gap:e}")]
    ModeCrossing { t: f64, gap: f64 },

    #[error("interaction-picture reference must be diagonal (off-diagonal magnitude {0:e})")]
    NonDiagonalReference(f64),

    #[error("singular eigenvalue difference |chi_ba| = {0:e}")]
    SingularGap(f64),

    #[error("Jordan decomposition not certified: {0}")]
    Uncertified(String),

    #[error("steady state is not unique: kernel dimension {0}")]
    AmbiguousSteadyState(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
}
