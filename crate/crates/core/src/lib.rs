//! Exact integration of rational functions in barycentric coordinates and the rational
//! finite elements built from them: a singular Zienkiewicz-type C1 element for the
//! biharmonic equation and a Guzman-Neilan-type divergence-free Stokes pair.
//!
//! Element-level work runs in parallel through rayon when the `parallel` feature is
//! enabled (the default). Results are identical with or without it.

#![allow(clippy::needless_range_loop)]

pub mod exact;
pub mod experiments;
pub mod fe;
pub mod guzman_neilan;
pub mod mesh;
pub mod quadrature;
pub mod ratfun;
pub mod solvers;
pub mod zienkiewicz;

mod error;

pub use error::Error;
pub use exact::{ExactValue, Rational};
pub use fe::{Execution, QuadratureMode, Variant};
pub use ratfun::{MultiIndex3, RatCombo};
