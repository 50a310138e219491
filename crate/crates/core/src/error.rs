use crate::ratfun::MultiIndex3;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("an infinite value can only be scaled by a positive factor")]
    ScaleInfiniteByNonpositive,
    #[error("operation requires a finite value")]
    InfiniteValue,
    #[error("rational function is singular at the evaluation point")]
    SingularEvaluation,
    #[error("index pair does not give a finite mean")]
    IndexNotFinite,
    #[error("term lam^{alpha} / (1-lam)^{beta} has an infinite mean")]
    InfiniteTerm { alpha: MultiIndex3, beta: MultiIndex3 },
    #[error("barycentric coordinates must be non-negative and sum to one")]
    DegenerateBarycenter,
    #[error("element {0} is degenerate")]
    DegenerateElement(usize),
    #[error("local interpolation matrix is singular")]
    SingularVandermonde,
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("edge bubble has a vanishing normal derivative at the edge midpoint")]
    ZeroBubbleNormalDerivative,
    #[error("curl of the edge bubble has a vanishing tangential trace at the edge midpoint")]
    ZeroBubbleTangentialTrace,
    #[error("nothing to plot")]
    EmptySeries,
    #[error("log axis needs positive values, got {0}")]
    NonPositiveOnLogAxis(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("linear system is singular")]
    SingularSystem,
    #[error("no unconstrained degrees of freedom")]
    NoFreeDofs,
    #[error("iteration did not converge after {0} steps")]
    NoConvergence(usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
