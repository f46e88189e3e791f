//! Error type shared by every module in the crate.

use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A derivative was requested from a kernel (or at a point) where it does
    /// not exist. The basic Matérn kernel has a kink at coincident points and
    /// its mixed second derivative is nowhere classically defined.
    #[error("{kernel} kernel: derivative not defined {context}")]
    UnsupportedDerivative {
        kernel: &'static str,
        context: &'static str,
    },

    /// Rejection sampling accepted too small a fraction of its draws.
    #[error(
        "rejection sampler accepted {accepted} of {attempts} draws; \
         acceptance rate fell below 1e-4"
    )]
    RejectionBudgetExceeded { accepted: usize, attempts: usize },

    /// An operation that needs at least one point received none.
    #[error("point set is empty")]
    EmptySet,

    /// An operation that needs at least two points received fewer.
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),

    /// The candidate set contains an exact duplicate point.
    #[error("candidate set contains duplicate points (indices {0} and {1})")]
    DuplicateCandidates(usize, usize),

    /// Two point sets (or a point and a set) disagree on dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A candidate whose residual power is at or below the numerical floor
    /// was asked to become a center; adding it would divide by (nearly) zero.
    #[error("candidate {index} is numerically dependent (squared power {power_sq:.3e})")]
    NumericallySingular { index: usize, power_sq: f64 },

    /// The power function vanishes on every candidate: the interpolant is
    /// exact on the discretized domain and no further center can be chosen.
    #[error("power function is zero on all candidates; interpolant is exact")]
    AllPowerZero,

    /// The restricted candidate set came out empty (e.g. every member sits
    /// at the numerical floor for a power-weighted rule).
    #[error("restricted candidate set is empty")]
    EmptyRestrictedSet,

    /// A selection rule or stopping test needs target values that were not
    /// supplied when the model was built.
    #[error("selection rule requires a target function, but none was given")]
    TargetRequired,

    /// A tabulated target does not line up with the point set it is used on.
    #[error("tabulated target has {got} values but the point set has {expected} points")]
    TargetLengthMismatch { expected: usize, got: usize },

    /// A tabulated target was asked for a value at a point outside its table.
    #[error("tabulated target cannot be evaluated at arbitrary points")]
    TabulatedTarget,

    /// Log-log fitting needs strictly positive data.
    #[error("log-log fit requires positive values; value at n={n} is {value}")]
    NonPositiveValue { n: usize, value: f64 },

    /// A fit window does not fit inside the available trace.
    #[error("fit window [{start}, {end}] invalid for a series of length {len}")]
    WindowOutOfRange {
        start: usize,
        end: usize,
        len: usize,
    },

    /// A configuration value is out of its legal range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A model file failed its load-time consistency check.
    #[error(
        "model file failed validation: max |A a - b| = {residual:.3e} \
         exceeds tolerance {tolerance:.3e}"
    )]
    ModelValidation { residual: f64, tolerance: f64 },

    /// A text file (CSV or similar) could not be parsed.
    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
