//! Error type shared by every module in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in this crate.
///
/// Solver and range errors carry enough state to diagnose the failure
/// without re-running (bracket endpoints, covered index range).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Parameters or arguments violate a documented precondition.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The weight exponent lies outside the supported range `0 < b <= 2`.
    ///
    /// Kept distinct from [`Error::InvalidParams`]: `b > 2` describes a
    /// weight that exists but for which the block machinery here does not
    /// apply, and callers may want to detect that case specifically.
    #[error("weight exponent b = {b} is outside the supported range 0 < b <= 2")]
    UnsupportedExponent { b: f64 },

    /// An argument left the mathematical domain of an operation
    /// (non-positive index, exponent below 1, vanishing inner factor, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A coefficient index fell outside the covered block range `(lo, hi]`.
    #[error("index {index} is outside the covered range ({lo}, {hi}]")]
    OutOfRange { index: u64, lo: u64, hi: u64 },

    /// The critical-radius solver hit its iteration cap. The final bracket
    /// and residual are preserved for inspection.
    #[error(
        "root solver stalled after {iterations} iterations: bracket [{lo}, {hi}], residual {residual}"
    )]
    SolverStalled {
        iterations: usize,
        lo: f64,
        hi: f64,
        residual: f64,
    },

    /// Malformed input data; `line` is 1-based within the source text.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
