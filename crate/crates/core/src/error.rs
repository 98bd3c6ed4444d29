use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported sphere dimension {0} (expected 1 or 2)")]
    UnsupportedDimension(usize),

    #[error("resolution {got} is below the minimum of {min}")]
    ResolutionTooLow { got: usize, min: usize },

    #[error("field has {got} values but the scheme has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value {value} at node {node}")]
    NonFinite { node: usize, value: f64 },

    #[error("fields live on different quadrature schemes")]
    SchemeMismatch,

    #[error("support function is not positive at node {node} (h = {value})")]
    OriginNotInterior { node: usize, value: f64 },

    #[error("body is not strictly convex: eigenvalue {min_eigenvalue:e} at node {node}")]
    NotConvex { node: usize, min_eigenvalue: f64 },

    #[error("could not generate a convex body after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("test function is not orthogonal: |<f, h sigma_k>| = {inner:e} exceeds {bound:e}")]
    OrthogonalityViolated { inner: f64, bound: f64 },

    #[error("body is not a solution of the isotropic equation: max residual {residual:e} > {tolerance:e}")]
    NotASolution { residual: f64, tolerance: f64 },

    #[error("solver lost convexity at iteration {iteration}")]
    LostConvexity { iteration: usize },

    #[error("solver diverged at iteration {iteration} (residual {residual:e})")]
    Diverged { iteration: usize, residual: f64 },

    #[error("solver hit the iteration cap ({iterations}) with residual {residual:e}")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
