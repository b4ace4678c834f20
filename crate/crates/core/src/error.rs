use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} must be even and at least 8")]
    InvalidGrid(usize),

    #[error("fields live on different grids (N = {0} vs N = {1})")]
    GridMismatch(usize, usize),

    #[error("field mean {mean:e} exceeds the zero-mean tolerance (max-norm {scale:e})")]
    NonZeroMean { mean: f64, scale: f64 },

    #[error("velocity field is not divergence-free (relative spectral divergence {0:e})")]
    NotDivergenceFree(f64),

    #[error("CFL violation at t = {t:.6}: Courant number {courant:.4} exceeds {limit}")]
    Cfl { courant: f64, limit: f64, t: f64 },

    #[error("trajectory step {step:.4} exceeds half the domain in one time step")]
    TrajectoryStep { step: f64 },

    #[error(
        "map inversion did not converge after {iterations} iterations (residual {residual:e})"
    )]
    InversionFailed { iterations: usize, residual: f64 },

    #[error("map is not invertible: {0}")]
    NotInvertible(String),

    #[error("bump radius {radius:.5} is under-resolved on N = {n}; need N >= {min_n}")]
    UnderResolved { radius: f64, n: usize, min_n: usize },

    #[error("degenerate witness: best derivative magnitude m = {m:e}")]
    DegenerateWitness { m: f64 },

    #[error("finite-difference derivative not converged: m = {m:e} vs {m_half:e} at half step")]
    WitnessNotConverged { m: f64, m_half: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field file: {0}")]
    Format(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
