use num_complex::Complex64;
use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Coin matrix fails the unitarity check.
    #[error("coin matrix is not unitary: max |U*U - I| entry = {deviation:.3e}, tolerance {tolerance:.0e}")]
    NonUnitary { deviation: f64, tolerance: f64 },

    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter {name} = {value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The integrator window is too small: amplitude reached the boundary.
    #[error("truncation radius {radius} too small: boundary amplitude {amplitude:.3e} exceeds {limit:.0e} at t = {t}")]
    TruncationTooSmall {
        radius: i64,
        amplitude: f64,
        limit: f64,
        t: f64,
    },

    /// A density was evaluated outside its open support.
    #[error("point {x} is outside the open support ({lo}, {hi})")]
    OutOfSupport { x: f64, lo: f64, hi: f64 },

    /// Operator evaluation too close to a regular singular point.
    #[error("evaluation point {z} is within {margin:.0e} of the singular point {singularity}")]
    SingularPoint {
        z: Complex64,
        singularity: Complex64,
        margin: f64,
    },

    /// Weierstrass functions evaluated too close to a lattice point.
    #[error("argument {x} is within {margin:.0e}*|w1| of a period-lattice point")]
    PolePoint { x: Complex64, margin: f64 },

    /// Fractional-power gauge evaluated on top of a branch point.
    #[error("gauge argument maps to z = {z}, within {margin:.0e} of the branch point {branch}")]
    BranchPoint {
        z: Complex64,
        branch: Complex64,
        margin: f64,
    },

    /// An iterative solve did not reach its target.
    #[error("{what} did not converge after {iterations} iterations (best error {best:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: u32,
        best: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
