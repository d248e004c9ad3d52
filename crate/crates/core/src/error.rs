use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("subdivision count must be at least 1")]
    InvalidSubdivisions,

    #[error("spatial dimension must be 2 or 3, got {0}")]
    InvalidDimension(usize),

    #[error("element {index} is degenerate (measure {measure:.3e})")]
    DegenerateElement { index: usize, measure: f64 },

    #[error("facet shared by more than two elements (vertices {0:?})")]
    NonmanifoldFacet([usize; 3]),

    #[error("mesh is not connected through interior facets")]
    DisconnectedMesh,

    #[error("no quadrature rule of degree {degree} on {dim}-simplices")]
    UnknownQuadratureDegree { dim: usize, degree: usize },

    #[error("regularization weight d11 must be positive, got {0}")]
    InvalidRegularization(f64),

    #[error("viscosity must be nonnegative, got {0}")]
    InvalidViscosity(f64),

    #[error("operation requires a positive viscosity, got {0}")]
    ZeroViscosity(f64),

    #[error("incomplete factorization broke down after {shifts} diagonal shifts")]
    FactorizationBreakdown { shifts: usize },

    #[error("MINRES breakdown at iteration {iter}: zero denominator in the Lanczos recurrence")]
    MinresBreakdown { iter: usize },

    #[error("preconditioner is not positive definite (detected at iteration {iter})")]
    PrecondNotSpd { iter: usize },

    #[error("negative curvature at CG iteration {iter}: operator is not positive definite")]
    NegativeCurvature { iter: usize },

    #[error(
        "inner solve for the velocity block did not converge in {maxit} iterations \
         (relative residual {residual:.3e})"
    )]
    InnerSolveFailed { maxit: usize, residual: f64 },

    #[error("solver did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    SolverFailed { iterations: usize, residual: f64 },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error(
        "bound is outside its validity regime: mu*d11/|K1| = {ratio:.3e} \
         is not below beta^2 = {beta2:.3e}"
    )]
    RegimeViolation { ratio: f64, beta2: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
