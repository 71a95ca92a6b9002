//! Error type shared by every module of the core crate.

use alloc::string::String;
use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A dimension parameter violates its constraint.
    #[error("invalid dimension {n}: {reason}")]
    InvalidDimension { n: usize, reason: &'static str },

    /// A non-dimension parameter is out of range or malformed.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Adaptive quadrature hit its subdivision limit before reaching tolerance.
    #[error(
        "quadrature did not converge on [{a}, {b}]: estimate {estimate:e}, \
         error {error:e} after {evaluations} evaluations"
    )]
    Quadrature { a: f64, b: f64, estimate: f64, error: f64, evaluations: usize },

    /// The requested mode or operation does not apply to this input.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A Monte Carlo estimate is incompatible with the quantity it estimates.
    #[error("numeric inconsistency: {0}")]
    NumericInconsistency(String),

    /// The inner grid cannot certify the requested accuracy.
    #[error(
        "inner budget {grid} too small: certified error {error:e} exceeds {max_error:e}; \
         a grid of about {required} points is needed"
    )]
    BudgetTooSmall { grid: usize, error: f64, max_error: f64, required: usize },

    /// An input collection was empty.
    #[error("empty input")]
    Empty,

    /// Two inputs that must agree in length do not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
