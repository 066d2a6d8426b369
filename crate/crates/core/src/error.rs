use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },
    #[error("singular operator (eigenvalue {eigenvalue:e})")]
    Singular { eigenvalue: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ill-posed problem: {0}")]
    IllPosed(String),
    #[error("non-finite objective along probe direction #{index}: {direction:?}")]
    ProbeFailure { index: usize, direction: Vec<f64> },
    #[error("numerical instability: {0}")]
    Instability(String),
    #[error("objective is not concave along the iterate path (Hessian eigenvalue {eigenvalue:e})")]
    NonConcave { eigenvalue: f64 },
    #[error("no convergence after {iterations} iterations (last gradient norm {last:e})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        trace: Vec<f64>,
    },
    #[error("invalid regime: {0}")]
    InvalidRegime(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degenerate spectrum: {positive} strictly positive eigenvalues, need at least 2")]
    DegenerateSpectrum { positive: usize },
    #[error("no sign change of the gap function in [{lo:e}, {hi:e}]")]
    Bracketing { lo: f64, hi: f64 },
    #[error("warm-start failure: {0}")]
    WarmStart(String),
    #[error("grid box too small: boundary mass {mass:e} exceeds {limit:e}")]
    BoundaryMass { mass: f64, limit: f64 },
    #[error("sampler never accepted a proposal after adaptation")]
    ZeroAcceptance,
    #[error("empty nuisance grid")]
    EmptyGrid,
    #[error("center is not a stationary point (gradient norm {grad_norm:e})")]
    NotStationary { grad_norm: f64 },
    #[error("profile maximization diverged at eta = {eta:?}")]
    ProfileDivergence { eta: Vec<f64> },
}

pub type Result<T> = core::result::Result<T, Error>;
