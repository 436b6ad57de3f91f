//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when building states, operators, or estimates.
///
/// Every variant names the violated field or constraint so callers can report
/// actionable messages without string matching.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A Fock-space dimension below the supported minimum for the operation.
    #[error("dimension {dim} is too small: {context} requires dim >= {min}")]
    DimensionTooSmall {
        dim: usize,
        min: usize,
        context: &'static str,
    },

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    /// A quadrature grid that does not cover the span required by the operation.
    #[error(
        "grid range [{lo}, {hi}] insufficient: {context} requires coverage of [{required_lo}, {required_hi}]"
    )]
    GridRange {
        lo: f64,
        hi: f64,
        required_lo: f64,
        required_hi: f64,
        context: &'static str,
    },

    /// Grid points not strictly ascending, or weights not positive.
    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: &'static str },

    /// Truncated representation loses more amplitude than the declared budget.
    #[error(
        "truncation leakage {leakage:.3e} exceeds budget {budget:.1e}: {context}; increase the dimension to at least {required_dim}"
    )]
    Truncation {
        leakage: f64,
        budget: f64,
        required_dim: usize,
        context: &'static str,
    },

    /// Measurement resolution outside the supported range.
    #[error("resolution dx = {dx:.3e} invalid: must be finite and >= {min:.1e}")]
    InvalidResolution { dx: f64, min: f64 },

    /// A scalar parameter outside its documented domain.
    #[error("parameter `{name}` = {value} invalid: must satisfy {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A matrix declared hermitian fails the hermiticity residual bound.
    #[error("hermiticity residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { residual: f64, tolerance: f64 },

    /// State carries non-negligible weight in the top truncation levels, so
    /// operator products there cannot be trusted.
    #[error(
        "truncation-edge contamination: weight {weight:.3e} in the top {levels} levels exceeds {tolerance:.1e}"
    )]
    EdgeContamination {
        weight: f64,
        levels: usize,
        tolerance: f64,
    },

    /// Conditioning on an outcome whose probability density underflows.
    #[error("outcome density {density:.3e} too small to normalize a conditional state")]
    VanishingDensity { density: f64 },

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("numerical integration did not converge over [{lo}, {hi}] at tolerance {tolerance:.1e}")]
    IntegrationNonconvergence { lo: f64, hi: f64, tolerance: f64 },

    /// Two independent evaluation routes for the same quantity disagree.
    #[error(
        "cross-check failed: {context}: routes give {value_a} and {value_b}, allowed difference {tolerance:.1e}"
    )]
    RouteDisagreement {
        value_a: f64,
        value_b: f64,
        tolerance: f64,
        context: &'static str,
    },

    /// Estimator invoked with fewer trials than its variance model supports.
    #[error("{got} trials is too few: estimator requires at least {min}")]
    TooFewTrials { got: usize, min: usize },

    /// Conditional estimator invoked with too few contributing events.
    #[error("{got} detected events is too few: statistic requires at least {min}")]
    InsufficientEvents { got: usize, min: usize },

    /// Moment order outside the implemented closed-form table.
    #[error("moment order ({order_x}, {order_y}) unsupported: total order must be <= {max_total}")]
    UnsupportedMomentOrder {
        order_x: usize,
        order_y: usize,
        max_total: usize,
    },
}
