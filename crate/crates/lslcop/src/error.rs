//! Error types shared across the crate.

use thiserror::Error;

/// Everything that can go wrong when building or evaluating diagonals,
/// copulas and the derived operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Knot list is not a well-formed piecewise-linear diagonal
    /// (unsorted, duplicate abscissae, endpoints missing, values outside [0,1] …).
    #[error("malformed knots: {0}")]
    MalformedKnots(String),

    /// Argument outside the domain of the operation (e.g. conditioning at x ∉ (0,1)).
    #[error("domain error: {0}")]
    Domain(String),

    /// An input diagonal fails class validation where membership is required.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter is outside its admissible range.
    #[error("parameter out of range: {0}")]
    ParamRange(String),

    /// Inputs that make the requested quantity undefined (e.g. convexity gap
    /// of a mixture of two copies of the same diagonal).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A bracketing or bisection search could not locate a solution.
    #[error("search failure: {0}")]
    SearchFailure(String),

    /// Two gridded objects have incompatible resolutions.
    #[error("resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(usize, usize),

    /// Malformed JSON input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
