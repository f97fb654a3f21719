use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("component count mismatch: expected {expected}, found {found}")]
    ComponentMismatch { expected: usize, found: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular matrix at {context}")]
    Singular { context: String },

    #[error("unsupported derivative order {0} (only 1 and 2 are available)")]
    UnsupportedOrder(u8),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("operator is not time independent")]
    TimeDependent,

    #[error("time {time} is not on the step lattice (t0 = {start}, dt = {step})")]
    OffLattice { time: f64, start: f64, step: f64 },

    #[error("dense assembly of dimension {dimension} exceeds the limit {limit}")]
    TooLarge { dimension: usize, limit: usize },

    #[error("need at least {required} samples, got {found}")]
    InsufficientSamples { required: usize, found: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("linear solve failed at t = {time} (condition estimate {condition:.3e})")]
    LinearSolve { time: f64, condition: f64 },

    #[error("iterative solver did not converge at t = {time} (residual {residual:.3e})")]
    NoConvergence { time: f64, residual: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("propagation requires t' > t (got t' = {t_prime}, t = {t})")]
    NotRetarded { t_prime: f64, t: f64 },

    #[error("incompatible kernel: {0}")]
    IncompatibleKernel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
