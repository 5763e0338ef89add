//! Quantum walks on the integer line, their weak-limit densities, and the
//! differential equations those densities satisfy.
//!
//! The crate has three layers:
//!
//! - Simulation: discrete-time coined walks ([`dtqw`]) evolved exactly by
//!   amplitude bookkeeping, and the continuous-time walk ([`ctqw`]) through
//!   both a Bessel closed form and a Runge-Kutta integrator.
//! - Limit laws: the long-time position densities and their measure forms
//!   ([`density`]), with quadrature-based distribution functions and
//!   Kolmogorov-Smirnov comparison against rescaled simulations.
//! - Differential structure: the Heun and hypergeometric operators that
//!   annihilate those densities ([`fuchsian`]), the confluence of one into
//!   the other under scaling, and an elliptic form ([`elliptic`],
//!   [`inozemtsev`]) in which the discrete-time density becomes an
//!   eigenfunction of an explicit one-particle Hamiltonian.
//!
//! All numerical claims are phrased as residuals or distances with explicit
//! tolerances; functions refuse evaluation near singular points instead of
//! returning poisoned values.

pub mod coin;
pub mod ctqw;
pub mod density;
pub mod dtqw;
pub mod elliptic;
pub mod error;
pub mod fuchsian;
pub mod inozemtsev;
pub mod state;

pub use coin::CoinOperator;
pub use ctqw::{closed_form, integrate, truncation_radius};
pub use density::{ks_distance, DensityProfile};
pub use dtqw::{evolve, step};
pub use elliptic::{solve_lattice, Lattice};
pub use error::{Error, Result};
pub use fuchsian::{
    confluence_error, confluent_limit_at, relative_residual, residual_scan, residual_scan_fd,
    scaled_heun, FuchsianEquation, GaussParams, HeunParams, ScaledHeunCoefficients, SolutionBundle,
};
pub use inozemtsev::{
    eigen_defect, eigen_residual, eigenvalue, gauge_g, hamiltonian_apply, z_map, InozemtsevParams,
};
pub use state::{CtqwState, DtqwState, EmpiricalCdf};
