//! Weighted ℓ1 recovery of non-uniformly sparse signals.
//!
//! The signal model splits the `n` coordinates into two classes `K1`, `K2`
//! with different probabilities of being nonzero. Recovery is by
//!
//! ```text
//!     minimize  Σ w_i |x_i|   subject to  A x = y
//! ```
//!
//! with weight 1 on `K1` and `W` on `K2`. Besides the solver and a Monte Carlo
//! harness, the crate evaluates the Grassmann-angle union bound on the failure
//! probability, both at finite `n` (numerical internal/external angles) and in
//! the large-`n` limit (per-dimension exponents), which yields weak recovery
//! thresholds and optimal weights.
//!
//! Module map:
//! - [`model`]: sparsity ensemble, weights, Gaussian instances.
//! - [`lpsolve`]: dense homogeneous primal-dual interior-point LP solver.
//! - [`recovery`]: weighted ℓ1 recovery, null-space condition, brute-force oracle.
//! - [`angles`]: finite-`n` internal/external angles and union-bound terms.
//! - [`exponents`]: asymptotic exponents, recoverability, thresholds, optimal weights.
//! - [`experiments`]: recovery-rate sweeps and theory comparison.
//! - [`manifest`], [`runner`], [`plot`]: run manifests, command execution, SVG output.

pub mod angles;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod lpsolve;
pub mod manifest;
pub mod model;
pub mod plot;
pub mod quad;
pub mod recovery;
pub mod rng;
pub mod runner;
pub mod special;

pub use error::{Error, Result};
