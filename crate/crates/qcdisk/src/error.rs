use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0} lies outside the open unit disk")]
    ZOutsideDisk(Complex64),
    #[error("point {0} is not on the unit circle")]
    EtaOffCircle(Complex64),
    #[error("evaluation point {0} too close to the circle for reliable quadrature")]
    ZTooCloseToCircle(Complex64),
    #[error("coincident points {0}")]
    CoincidentPoints(Complex64),
    #[error("finite-difference stencil at {z} with step {h} leaves the domain")]
    StencilOutOfDomain { z: Complex64, h: f64 },
    #[error("empty sample set")]
    EmptySampleSet,
    #[error("degenerate Jacobian: |dw| = {dz_norm} <= |dzbar w| = {dzbar_norm}")]
    DegenerateJacobian { dz_norm: f64, dzbar_norm: f64 },
    #[error("point {z} too close to the zero locus (|w| = {rho} <= {min})")]
    NearZeroLocus { z: Complex64, rho: f64, min: f64 },
    #[error("dilatation ratio k = {0} out of [0, 1)")]
    KOutOfRange(f64),
    #[error("lower Mori bound requires a normalization point a with w(a) = 0")]
    MissingNormalizationPoint,
    #[error("no feasible lambda in (0, 1/(2 sqrt(Lambda))): {0}")]
    NoFeasibleLambda(String),
    #[error("alpha exhausted at {alpha}: smallness condition value {value} >= 1; M(alpha) curve: {curve:?}")]
    AlphaExhausted {
        alpha: f64,
        value: f64,
        curve: Vec<(f64, f64)>,
    },
    #[error("boundary spec is not monotone: gamma'(theta) changes sign")]
    NonMonotoneBoundary,
    #[error("solver did not converge: residual {residual} after {iterations} iterations")]
    SolverDidNotConverge { residual: f64, iterations: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("pipeline stage {stage} failed: {reason}")]
    StageFailed { stage: &'static str, reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
