use thiserror::Error;

pub type Result<T, E = FinslerError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FinslerError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("a nonzero tangent vector is required")]
    ZeroVector,

    #[error("fundamental tensor is not positive definite (invalid metric or finite-difference step too large)")]
    NotPositiveDefinite,

    #[error("fundamental tensor is singular")]
    SingularTensor,

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inverse Legendre transform did not converge within {iterations} iterations")]
    LegendreDiverged { iterations: usize },

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("shooting diverged after {iterations} iterations (residual {residual:e})")]
    ShootingDiverged { iterations: usize, residual: f64 },

    #[error("ambiguous preimage: two candidate velocities have lengths {first} and {second}")]
    AmbiguousPreimage { first: f64, second: f64 },

    #[error("degenerate flag: flagpole is (nearly) parallel to the pole")]
    DegenerateFlag,

    #[error("inputs must lie on the indicatrix: {0}")]
    UnnormalizedInput(String),

    #[error("quadrature order {order} is too low for dimension {dim}")]
    DegenerateQuadrature { order: usize, dim: usize },

    #[error("dimension {0} is not supported by this operation")]
    UnsupportedDimension(usize),

    #[error("chart has no compact fundamental domain")]
    NonCompactChart,

    #[error(
        "center-of-mass iteration did not converge in {iterations} iterations (|V| = {residual:e})"
    )]
    MaxIterExceeded { iterations: usize, residual: f64 },

    #[error("shooting to mass point {index} failed: {source}")]
    MassPoint {
        index: usize,
        #[source]
        source: Box<FinslerError>,
    },

    #[error("degenerate geodesic triangle")]
    DegenerateTriangle,

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl FinslerError {
    /// True for failures caused by bad inputs or configuration rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            FinslerError::Config(_)
                | FinslerError::Json(_)
                | FinslerError::Csv(_)
                | FinslerError::Io(_)
                | FinslerError::InvalidMetric(_)
                | FinslerError::InvalidParameter(_)
                | FinslerError::DimensionMismatch { .. }
                | FinslerError::UnsupportedModel(_)
                | FinslerError::UnsupportedDimension(_)
                | FinslerError::NonCompactChart
        )
    }
}
