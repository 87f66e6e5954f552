use thiserror::Error;

/// Failures reported by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("x = {0} lies outside [0, pi]")]
    OutOfDomain(f64),

    #[error("invalid boundary parameters: {0}")]
    InvalidBoundary(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bad solution grid: {0}")]
    Grid(String),

    /// Root refinement for eigenvalue `index` hit the iteration cap.
    #[error("eigenvalue {index} did not converge within {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("delta equation has no sign change on [-1, 1] (n = {n}, alpha = {alpha}, beta = {beta})")]
    DeltaNoRoot { n: usize, alpha: f64, beta: f64 },

    /// psi_n is not proportional to phi_n, which means mu_n is not converged.
    #[error("eigenfunction ratio residual {residual:e} exceeds {threshold:e}")]
    RatioResidual { residual: f64, threshold: f64 },

    #[error("quadrature grid spacing {spacing:e} is coarser than required {required:e}")]
    CoarseGrid { spacing: f64, required: f64 },

    #[error("mu = {mu} is too close to an eigenvalue (|W| = {wronskian:e})")]
    NearEigenvalue { mu: f64, wronskian: f64 },

    #[error("mu = 0 is an eigenvalue (|W(0)| = {0:e}); shift the potential first")]
    ZeroEigenvalue(f64),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
