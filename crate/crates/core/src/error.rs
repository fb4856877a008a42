use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point lies within tolerance of the zero a_{index}")]
    ZeroOfF { index: usize },
    #[error("tail bound cannot certify the requested accuracy")]
    TailBoundUnavailable,
    #[error("radius {radius:e} is outside the certified evaluation range")]
    EvaluationRange { radius: f64 },
    #[error("zero a_{index} violates the sector condition")]
    SectorViolation { index: usize },
    #[error("unknown function family `{0}`")]
    UnknownFamily(String),
    #[error("invalid zero sequence: {0}")]
    InvalidSequence(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("radius {radius:e} is below the threshold {threshold:e}")]
    ThresholdViolation { radius: f64, threshold: f64 },
    #[error("m(r) = 0: radius too small for the chosen nu and c1")]
    TooFewIslands,
    #[error("cannot pack the requested discs: {0}")]
    PackingImpossible(String),
    #[error("Newton iteration diverged after {iterations} steps")]
    NewtonDiverged { iterations: usize },
    #[error("Newton iterate left the disc")]
    LeftDisc,
    #[error("continuation failed at boundary parameter {at}")]
    ContinuationBroke { at: f64 },
    #[error("traced boundary did not close (gap {gap:e})")]
    NotClosed { gap: f64 },
    #[error("threshold {0} not found in scan range")]
    NotFoundInScanRange(&'static str),
    #[error("level {level} is beyond the certified horizon")]
    HorizonExceeded { level: usize },
    #[error("diameter d_{level} >= 1")]
    DegenerateDiameter { level: usize },
    #[error("box counting needs at least 4 scales, got {0}")]
    InsufficientScales(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
