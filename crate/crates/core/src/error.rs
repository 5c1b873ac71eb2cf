use thiserror::Error;

/// Errors raised by the almost-periodic toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ApError {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("lattice mismatch: operands live on different frequency lattices")]
    LatticeMismatch,

    #[error("axis {axis} out of range for dimension {dimension}")]
    AxisOutOfRange { axis: usize, dimension: usize },

    #[error("grid with {m} points per axis is too small (need at least {required})")]
    GridTooSmall { m: usize, required: usize },

    #[error("lower bound violated: grid minimum of |f| is {grid_min:e}, required > {eps:e}")]
    LowerBoundViolated { grid_min: f64, eps: f64 },

    #[error("Jacobian margin violated: grid minimum of det(I + df) is {grid_min:e}")]
    MarginViolated { grid_min: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("step failure at t = {t}: {cause}")]
    StepFailure { t: f64, cause: Box<ApError> },

    #[error("requested time {t} is beyond the admissible window (blow-up time {blowup})")]
    BeyondBlowup { t: f64, blowup: f64 },

    #[error("order m = {m} is not supported for sampled functions (need m < 1)")]
    UnsupportedOrder { m: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, ApError>;
