use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures of the workbench operations.
///
/// Variants are split into domain errors (the inputs are well formed but the
/// mathematical object is degenerate or inconsistent) and internal errors
/// (a construction that cannot fail on valid data did fail).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid Siegel point: {0}")]
    InvalidSiegelPoint(String),

    #[error("invalid polarization: {0}")]
    InvalidPolarization(String),

    #[error("matrix is not symplectic (defect {defect:.3e})")]
    NotSymplectic { defect: f64 },

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("matrix is not symmetric for the compatible metric (defect {defect:.3e})")]
    NotMetricSymmetric { defect: f64 },

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("fixed point is degenerate: |det(I - g)| = {det:.3e}")]
    FixedPointDegenerate { det: f64 },

    #[error("index residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("branch tracking exceeded the subdivision limit (smallest step {min_step:.3e})")]
    SubdivisionLimit { min_step: f64 },

    #[error("mismatched endpoints: {0}")]
    MismatchedEndpoints(String),

    #[error("parameters ({u}, {v}) lie outside the unit disc")]
    OutsideDisc { u: f64, v: f64 },

    #[error("{value} is not a {order}-th root of unity")]
    NotRootOfUnity { value: String, order: u32 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("divergent Gaussian integral: real part of the exponent is not negative definite")]
    DivergentIntegral,

    #[error("phase-form system is rank deficient ({rank} of {unknowns})")]
    RankDeficient { rank: usize, unknowns: usize },

    #[error("fixed point {index} violates transversality: |det(I - g)| = {det:.3e}")]
    TransversalityViolation { index: usize, det: f64 },

    #[error("fixed point {index} carries no metaplectic element")]
    MissingIndex { index: usize },

    #[error("fixed point {index} has a degenerate holomorphic tangent map")]
    DegenerateHolomorphicTangent { index: usize },

    #[error("rotation angle {theta} is a multiple of 2*pi")]
    DegenerateAngle { theta: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl Error {
    /// `true` for errors that describe the input rather than a defect of the
    /// implementation or of the request shape.
    pub fn is_domain_error(&self) -> bool {
        !matches!(
            self,
            Error::DimensionMismatch { .. } | Error::InvalidArgument(_) | Error::Internal(_)
        )
    }
}
