use thiserror::Error;

/// Errors raised anywhere in the calibration pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("group elements belong to different gauge specs")]
    SpecMismatch,
    #[error("factor `{factor}` coordinate {value} leaves its bounds [{lo}, {hi}]")]
    BoundsViolation {
        factor: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("unknown factor `{0}`")]
    UnknownFactor(String),
    #[error("invalid gauge spec: {0}")]
    InvalidSpec(String),
    #[error("curve parameter {t} outside [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid detector geometry: {0}")]
    InvalidGeometry(String),
    #[error("image does not match its geometry: {0}")]
    InvalidImage(String),
    #[error("image contains non-finite or negative values")]
    NonFiniteInput,
    #[error("geometry mismatch: images come from different detector geometries")]
    GeometryMismatch,
    #[error("image has zero norm")]
    ZeroImage,
    #[error("bad gaussian spot parameters: {0}")]
    BadSpotParameters(String),
    #[error("norm exponent k = {0} is below 1")]
    BadK(f64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("all probe images are degenerate (constant or zero)")]
    DegenerateProbes,
    #[error("need at least {needed} probe images, got {got}")]
    TooFewProbes { needed: usize, got: usize },
    #[error("detector catalog for {0} factors exceeds the 20-factor limit")]
    TooManyFactors(usize),
    #[error("coordinate {value} of factor `{factor}` outside search bounds [{lo}, {hi}]")]
    OutOfBounds {
        factor: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("measured image is identically zero")]
    AllZeroMeasured,
    #[error("invalid optimizer or objective configuration: {0}")]
    InvalidConfig(String),
    #[error("brute-force grid needs {0} evaluations, above the 1e7 budget")]
    BudgetExceeded(u128),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code used by the command-line front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ZeroImage | Error::AllZeroMeasured | Error::DegenerateProbes => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
