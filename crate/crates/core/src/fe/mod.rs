//! Element-independent machinery: quadrature modes, reference tables, local basis changes
//! and global assembly.

mod assembly;
mod dense;
mod tables;

use std::fmt;
use std::str::FromStr;

pub use assembly::{assemble_matrix, assemble_vector, DofMap};
pub use dense::Matrix;
pub use tables::{
    eval_exact, hess_pair, lagrange_basis, rhs_moments, Integrator, Prepared, Tensor, HESS_PAIRS,
};

use crate::Error;

/// How element integrals are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuadratureMode {
    /// Exact means, rounded once to `f64`.
    Exact,
    /// Collapsed tensor Gauss rule with `n` points per direction.
    Gauss(usize),
}

impl fmt::Display for QuadratureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadratureMode::Exact => write!(f, "exact"),
            QuadratureMode::Gauss(n) => write!(f, "gauss:{n}"),
        }
    }
}

impl FromStr for QuadratureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "exact" {
            return Ok(QuadratureMode::Exact);
        }
        let n = s
            .strip_prefix("gauss:")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| (1..=64).contains(&n))
            .ok_or_else(|| Error::Parse(format!("quadrature must be `exact` or `gauss:N`, got {s:?}")))?;
        Ok(QuadratureMode::Gauss(n))
    }
}

/// Full element or its reduced subspace.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Variant {
    #[default]
    Full,
    Reduced,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Full => write!(f, "full"),
            Variant::Reduced => write!(f, "reduced"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "full" => Ok(Variant::Full),
            "reduced" => Ok(Variant::Reduced),
            _ => Err(Error::Parse(format!("variant must be `full` or `reduced`, got {s:?}"))),
        }
    }
}

/// Element loop execution strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise sequential.
    #[default]
    Parallel,
}

/// Apply `f` to every element index and collect the results in element order.
pub fn map_elements<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}
