//! Exact means of rational barycentric functions over triangles and a Gauss rule for comparison.

mod exact;
mod gauss;

pub use exact::{
    compute_j, integral_mean, integral_mean_beta2, integral_mean_combo, integral_mean_poly,
    integral_mean_uncached, CacheStats, IntegralCache,
};
pub use gauss::{gauss_integrate, gauss_legendre, GaussRule};
