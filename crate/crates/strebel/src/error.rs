use num_complex::Complex64;
use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("poles {0} and {1} coincide (relative distance below 1e-12)")]
    DuplicatePoles(usize, usize),
    #[error("weight {0} is zero")]
    ZeroWeight(usize),
    #[error("total weight {0} is not positive")]
    NonpositiveTotalWeight(f64),
    #[error("pole and weight lists have different lengths ({poles} vs {weights})")]
    LengthMismatch { poles: usize, weights: usize },
    #[error("no poles given")]
    Empty,
    #[error("evaluation at pole {index} (z = {z})")]
    EvaluationAtPole { index: usize, z: Complex64 },
    #[error("root solver failed to converge (residual {residual:.3e})")]
    RootSolverFailure { residual: f64 },
    #[error("level {level} is too close to critical value {critical} (relative margin below {margin:.1e})")]
    NearCriticalLevel { level: f64, critical: f64, margin: f64 },
    #[error("field magnitude {field:.3e} below cutoff near z = {z}; level too close to a critical value")]
    NearCriticalPoint { z: Complex64, field: f64 },
    #[error("trajectory failed to close within arc length {arc_limit:.3e}")]
    NoClosure { arc_limit: f64 },
    #[error("critical trajectory escaped: arc bound {arc_limit:.3e} exceeded")]
    TraceEscape { arc_limit: f64 },
    #[error("seed is not on the requested level set (|u - ln lambda| = {off:.3e})")]
    SeedOffLevel { off: f64 },
    #[error("level must be positive, got {0}")]
    NonpositiveLevel(f64),
    #[error("contour touches the sampling box; enlarge the box")]
    BoxTooSmall,
    #[error("boundary-integral system is singular or ill-conditioned; increase the node count")]
    SolverSingular,
    #[error("center point lies outside the curve")]
    P0Outside,
    #[error("evaluation point too close to the boundary (distance {dist:.3e}, cutoff {cutoff:.3e})")]
    TooCloseToBoundary { dist: f64, cutoff: f64 },
    #[error("pole {index} lies on the wrong side of the curve")]
    PoleOnWrongSide { index: usize },
    #[error("branch continuation path passes within {dist:.3e} of pole {index}")]
    BranchPathCrossesPole { index: usize, dist: f64 },
    #[error("maps were built on different curves (node distance {dist:.3e})")]
    CurveMismatch { dist: f64 },
    #[error("fingerprint samples are not strictly monotone (branch handling bug)")]
    NonMonotone,
    #[error("fingerprint sample {index} has modulus {modulus} off the unit circle")]
    NonUnitModulus { index: usize, modulus: f64 },
    #[error("no component with signature {0:?} at this level")]
    ComponentNotFound(Vec<usize>),
    #[error("trace step size underflow at z = {z}")]
    StepUnderflow { z: Complex64 },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end:
    /// 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DuplicatePoles(..)
            | Error::ZeroWeight(..)
            | Error::NonpositiveTotalWeight(..)
            | Error::LengthMismatch { .. }
            | Error::Empty
            | Error::NonpositiveLevel(..)
            | Error::Config(..)
            | Error::Io(..)
            | Error::Json(..) => 2,
            _ => 3,
        }
    }
}
