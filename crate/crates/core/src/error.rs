use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gap {index} is empty or inverted: ({lower}, {upper})")]
    EmptyGap { index: usize, lower: f64, upper: f64 },

    #[error("gap {index} starts at {lower}, not above the spectrum base {e_low}")]
    GapBelowBase { index: usize, lower: f64, e_low: f64 },

    #[error("gaps {first} and {second} overlap or touch")]
    OverlappingGaps { first: usize, second: usize },

    #[error("invalid tail model: {0}")]
    InvalidTail(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("gap index {index} out of range ({count} gaps)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("series diverges: {0}")]
    Divergent(String),

    #[error("energy {mu} lies outside the closed gap [{lower}, {upper}]")]
    OutsideGap { mu: f64, lower: f64, upper: f64 },

    #[error("state has {got} angles, gap set has {expected} gaps")]
    StateLength { expected: usize, got: usize },

    #[error("grid too short: need at least {needed} points, have {have}")]
    GridTooShort { needed: usize, have: usize },

    #[error("step size underflow at s = {at} (h = {step:e})")]
    StepUnderflow { at: f64, step: f64 },

    #[error("spectral point {re}{im:+}i lies on the spectrum")]
    OnSpectrum { re: f64, im: f64 },

    #[error("spectral point is a Dirichlet eigenvalue (pole of the m-functions)")]
    DirichletPole,

    #[error("point {lambda} is within {distance:e} of a spectral edge")]
    NearEdge { lambda: f64, distance: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Fourier coefficient for m = {m:?} exceeds the decay bound ({value:e} > {bound:e})")]
    CoefficientBound { m: Vec<i64>, value: f64, bound: f64 },

    #[error("gap model inconsistent: {0}")]
    ModelInconsistent(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
