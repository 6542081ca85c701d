//! Discrete solvers for the quasilinear Robin problem
//!
//! ```text
//! -(a(u'))' + xi(z) u^{p-1} = lambda u^{p-1} + f(z, u)   on (a_left, a_right)
//! a(u') n + beta u^{p-1} = 0                             at both endpoints
//! ```
//!
//! with `a(y) = a0(|y|) y`, an indefinite potential `xi`, and a parametric
//! reaction. The crate computes principal eigenpairs, minimal positive
//! solutions, second (mountain-pass) solutions and the critical parameter
//! `lambda*` on a uniform P1 mesh.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`). The `*64`
//! aliases below are what most callers want.

pub mod continuation;
pub mod eigen;
pub mod energy;
mod error;
pub mod mesh;
mod numerics;
pub mod operator;
mod optim;
pub mod problem;
mod scalar;
pub mod solve;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use continuation::{
    check_left_continuity, detect_lambda_star, picone_defect, sweep, sweep_with_second,
    LambdaStarInterval, LeftContinuityReport, SolutionBranch,
};
pub use eigen::{
    check_simplicity, principal_eigenpair, principal_eigenpair_on, EigenOptions, EigenResult, SimplicityReport,
};
pub use energy::{
    assemble_mu, diaz_saa_convexity, energy, gradient, rayleigh, DiazSaaProbe, DiazSaaReport, Family, FunctionalSpec,
};
pub use mesh::{boundary_term, c1_distance, cone_check, norm_w1p, ConeStatus, DiscreteFunction, Mesh};
pub use operator::{check_hypotheses, HypothesisGrid, HypothesisReport, OperatorKind, OperatorSpec};
pub use problem::{
    estimate_xi_hat, eval_F, eval_d, eval_f, eval_truncated, AuxCoeffs, ClassFlags, PerturbationKind, PerturbationSpec,
    ProblemSpec, TruncatedReaction, TruncationMode, XiSpec,
};
pub use solve::{
    minimal_solution, minimal_solution_from, minimize, mountain_pass, multistart_functional, multistart_uniqueness,
    residual, second_solution, solve_auxiliary, solve_auxiliary_with, MountainPassParams, SolveOutcome, SolverParams,
    Status, UniquenessReport,
};

/// Crate version, stamped on CLI artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Mesh64 = Mesh<f64>;
pub type DiscreteFunction64 = DiscreteFunction<f64>;
pub type OperatorSpec64 = OperatorSpec<f64>;
pub type ProblemSpec64 = ProblemSpec<f64>;
pub type PerturbationSpec64 = PerturbationSpec<f64>;
pub type FunctionalSpec64 = FunctionalSpec<f64>;
pub type SolverParams64 = SolverParams<f64>;
pub type SolveOutcome64 = SolveOutcome<f64>;
pub type EigenResult64 = EigenResult<f64>;
pub type EigenOptions64 = EigenOptions<f64>;

pub type Mesh32 = Mesh<f32>;
pub type DiscreteFunction32 = DiscreteFunction<f32>;
pub type OperatorSpec32 = OperatorSpec<f32>;
pub type ProblemSpec32 = ProblemSpec<f32>;
pub type PerturbationSpec32 = PerturbationSpec<f32>;
pub type FunctionalSpec32 = FunctionalSpec<f32>;
pub type SolverParams32 = SolverParams<f32>;
pub type SolveOutcome32 = SolveOutcome<f32>;
pub type EigenResult32 = EigenResult<f32>;
pub type EigenOptions32 = EigenOptions<f32>;
