use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed audit grid: {0}")]
    Grid(String),
    #[error("adaptive quadrature failed to converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("truncation mode requires a barrier function")]
    BarrierMissing,
    #[error("no shift up to 1e6 makes f + s x^(p-1) nondecreasing on [0, {rho}]")]
    XiHatNotFound { rho: f64 },
    #[error("discrete functions live on different meshes")]
    MeshMismatch,
    #[error("the zero function has no Rayleigh quotient")]
    ZeroFunction,
    #[error("function is not strictly positive")]
    NotPositive,
    #[error("operation is defined for the p-Laplacian only")]
    NotPLaplace,
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("mountain-pass path collapsed into the basin of the lower endpoint")]
    PathCollapse,
    #[error("no pair (c9, c10) <= 1e6 certifies the auxiliary lower bound")]
    CoefficientSearchFailed,
    #[error("monotone iteration decreased by {decrease:e} at node {node}")]
    MonotoneViolation { decrease: f64, node: usize },
    #[error("no valid lambda bracket: {0}")]
    Bracket(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("postcondition failed: {0}")]
    Postcondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
