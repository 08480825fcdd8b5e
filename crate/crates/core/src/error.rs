use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid alpha {0:?}: 2*alpha must be a positive integer")]
    InvalidAlpha(String),

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("sqrt(pi) exponents do not cancel in gamma ratio (numerator {numerator}, denominator {denominator})")]
    SqrtPiMismatch { numerator: u32, denominator: u32 },

    #[error("hypergeometric series does not terminate: no non-positive integer upper parameter")]
    NonTerminating,

    #[error(
        "lower hypergeometric parameter {parameter} vanishes at term {index} before termination"
    )]
    VanishingDenominator { parameter: String, index: usize },

    #[error("the {family} family is not defined for alpha = {alpha}")]
    FamilyAlpha { family: &'static str, alpha: String },

    #[error("requested {needed} moments but only {available} are available")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("empty or inverted interval [{a}, {b}]")]
    BadInterval { a: String, b: String },

    #[error("x = {x} lies outside the support [{a}, {b}]")]
    OutsideSupport { x: String, a: String, b: String },

    #[error("cdf does not bracket the target {target} on the support")]
    NotBracketed { target: String },

    #[error("negative radicand {0} beyond rounding tolerance; raise the working precision")]
    NegativeRadicand(String),

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureTolerance { estimate: f64, tolerance: f64 },

    #[error("series terms stopped decaying at term {index} (ratio {ratio})")]
    SeriesNoDecay { index: usize, ratio: String },

    #[error("series did not reach the requested accuracy within {0} terms")]
    SeriesTermCap(usize),

    #[error("epsilon must be positive")]
    NonPositiveEpsilon,

    #[error("{0}")]
    InvalidArgument(String),

    #[error("cache file {path}: {detail}")]
    CacheCorrupt { path: PathBuf, detail: String },

    #[error("cache directory {0} does not exist")]
    MissingCacheDir(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
