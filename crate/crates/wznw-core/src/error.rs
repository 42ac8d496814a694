//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the computational layers.
///
/// Every error is a hard failure of a stated precondition or of a numeric
/// guarantee; nothing is silently truncated or coerced.
#[derive(Debug, Error)]
pub enum Error {
    /// A Cartan matrix or type label failed validation.
    #[error("invalid Cartan data: {0}")]
    InvalidCartan(String),

    /// A weight was expected to be dominant integral but is not.
    #[error("weight {0:?} is not dominant integral")]
    NotDominant(Vec<i64>),

    /// A weight is not admissible at the given level ((lambda, theta) > k).
    #[error("weight {weight:?} is not admissible at level {level}: (weight, theta) = {pairing} > level")]
    NotAdmissible {
        weight: Vec<i64>,
        level: String,
        pairing: String,
    },

    /// The level would make the Sugawara denominator k + h_dual vanish.
    #[error("level {0} equals the critical level -h_dual; Sugawara construction undefined")]
    CriticalLevel(String),

    /// A mode application would leave the truncation window.
    #[error("depth overflow: operator maps depth {from} to depth {to}, truncation depth is {max}")]
    DepthOverflow { from: i64, to: i64, max: i64 },

    /// Slot indices into a tensor space were invalid.
    #[error("invalid tensor slots: {0}")]
    BadSlots(String),

    /// A matrix operation received incompatible shapes.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A linear system was inconsistent or a matrix singular where
    /// invertibility is required.
    #[error("singular linear system: {0}")]
    Singular(String),

    /// An eigenvalue computation did not split over the rationals.
    #[error("matrix is not rationally diagonalizable: {0}")]
    NotDiagonalizable(String),

    /// A Frobenius solution would require a logarithmic term.
    #[error("logarithmic Frobenius solution required at exponent {exponent} + {offset}: resonant obstruction is nonzero")]
    LogObstruction { exponent: String, offset: u32 },

    /// A series truncation could not meet the requested tolerance.
    #[error("series tail too large: estimated {estimate} > tolerance {tolerance} at order {order}")]
    SeriesTail {
        estimate: String,
        tolerance: String,
        order: usize,
    },

    /// A continuation path passes too close to a singular point.
    #[error("path too close to singular point {singularity}: distance {distance}")]
    PathNearSingularity {
        singularity: String,
        distance: String,
    },

    /// Adaptive integration collapsed its step size without converging.
    #[error("step size collapsed during path integration near {near}")]
    StepCollapse { near: String },

    /// The requested working precision cannot be met.
    #[error("precision not met: {0}")]
    PrecisionNotMet(String),

    /// A run configuration failed validation.
    #[error("config error ({field}): {message}")]
    Config { field: String, message: String },

    /// Input/output failure while writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Anything that indicates an internal invariant was violated.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
