use thiserror::Error;

/// Crate-wide error type. Domain errors are raised eagerly at the point
/// where a precondition fails, never deferred into NaN results.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate scene depth at image point ({x}, {y}): Z_C = {z}")]
    DegenerateDepth { x: f64, y: f64, z: f64 },

    #[error("scene distance Z0 must be positive, got {0}")]
    NonPositiveZ0(f64),

    #[error("pair baseline is zero in the earlier frame; relative size change is undefined")]
    ZeroBaseline,

    #[error("need at least 2 tracked points, got {0}")]
    TooFewPoints(usize),

    #[error("tracked point lists disagree in length: {0} vs {1}")]
    PointCountMismatch(usize, usize),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),

    #[error("height must be positive to form a divergence, got {0}")]
    NonPositiveHeight(f64),

    #[error("start altitude {0} outside the open interval (0.05, 15)")]
    AltitudeOutOfRange(f64),

    #[error("{field} = {value} outside its allowed range [{lo}, {hi}]")]
    ParamOutOfRange {
        field: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("fitness vector contains a non-finite component")]
    UnevaluatedIndividual,

    #[error("objective vectors disagree in dimension: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("front is empty")]
    EmptyFront,

    #[error("front member ({x}, {y}) lies outside the reference box ({rx}, {ry})")]
    OutsideReference { x: f64, y: f64, rx: f64, ry: f64 },

    #[error("genome does not match its architecture tag: {0}")]
    GenomeShape(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("archive is malformed: {0}")]
    MalformedArchive(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
