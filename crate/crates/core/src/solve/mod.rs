//! Nonlinear solvers: direct minimization, the auxiliary barrier problem,
//! monotone iteration to the minimal positive solution, mountain-pass second
//! solutions and multistart uniqueness probes.

mod auxiliary;
mod monotone;
mod mountain;
mod multistart;

use std::sync::Arc;

pub use auxiliary::{solve_auxiliary, solve_auxiliary_with};
pub use monotone::{minimal_solution, minimal_solution_from};
pub use mountain::{mountain_pass, second_solution, MountainPassParams};
pub use multistart::{multistart_functional, multistart_uniqueness, UniquenessReport};

use crate::energy::{FunctionalSpec, MeshFunctional};
use crate::error::{Error, Result};
use crate::mesh::{cone_check, ConeStatus, DiscreteFunction, Mesh};
use crate::operator::OperatorSpec;
use crate::optim::{lbfgs, newton_refine, LbfgsOptions, Objective};
use crate::problem::ProblemSpec;
use crate::scalar::{c, Scalar};

/// Strict positivity threshold used to decide membership in the positive cone interior.
pub const CONE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams<T> {
    pub n_cells: usize,
    pub tol_grad: T,
    pub max_iters: usize,
    /// Shift `eta`; `None` means `||xi||_inf + 1`.
    pub eta_shift: Option<T>,
    /// Monotonicity shift for the reaction; `None` means estimate it from the data.
    pub xi_hat: Option<T>,
    pub divergence_norm: T,
    pub seed: u64,
    /// Upper exponent of the auxiliary reaction; `None` means `p + 2`.
    pub aux_r: Option<T>,
}

impl<T: Scalar> Default for SolverParams<T> {
    fn default() -> Self {
        Self {
            n_cells: 256,
            tol_grad: c(1e-8),
            max_iters: 20_000,
            eta_shift: None,
            xi_hat: None,
            divergence_norm: c(1e6),
            seed: 42,
            aux_r: None,
        }
    }
}

impl<T: Scalar> SolverParams<T> {
    pub fn validate(&self, prob: &ProblemSpec<T>) -> Result<()> {
        if !(self.tol_grad > T::zero()) {
            return Err(Error::InvalidParameter("tol_grad must be positive".into()));
        }
        if let Some(eta) = self.eta_shift {
            if !(eta > prob.xi_inf_norm()) {
                return Err(Error::InvalidParameter(format!(
                    "eta_shift = {eta} must exceed ||xi||_inf = {}",
                    prob.xi_inf_norm()
                )));
            }
        }
        if !(self.divergence_norm > T::zero()) {
            return Err(Error::InvalidParameter("divergence_norm must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        Ok(())
    }

    pub fn eta(&self, prob: &ProblemSpec<T>) -> T {
        self.eta_shift.unwrap_or_else(|| prob.default_eta())
    }

    pub fn mesh(&self, prob: &ProblemSpec<T>) -> Result<Arc<Mesh<T>>> {
        Mesh::shared(prob.interval.0, prob.interval.1, self.n_cells)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Solution,
    NoSolutionDetected,
    NoConvergence,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Solution => "Solution",
            Status::NoSolutionDetected => "NoSolutionDetected",
            Status::NoConvergence => "NoConvergence",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome<T> {
    pub status: Status,
    pub u: Option<DiscreteFunction<T>>,
    pub residual: T,
    pub energy_value: T,
    pub iterations: usize,
    /// Energies of accepted iterates (minimization) or of the sequence (monotone iteration).
    pub energy_trace: Vec<T>,
}

impl<T: Scalar> SolveOutcome<T> {
    pub(crate) fn none(status: Status, iterations: usize) -> Self {
        Self { status, u: None, residual: T::infinity(), energy_value: T::nan(), iterations, energy_trace: Vec::new() }
    }

    pub fn is_solution(&self) -> bool {
        self.status == Status::Solution
    }
}

pub(crate) struct MinRun<T> {
    pub x: Vec<T>,
    pub f: T,
    pub grad_norm: T,
    pub iterations: usize,
    pub diverged: bool,
    pub trace: Vec<T>,
}

/// L-BFGS followed by a Newton polish when the quasi-Newton phase stalls.
pub(crate) fn run_min<T: Scalar, O: Objective<T> + ?Sized>(
    obj: &O,
    x0: &[T],
    tol: T,
    max_iters: usize,
    divergence: T,
) -> Result<MinRun<T>> {
    let opts = LbfgsOptions { tol_grad: tol, max_iters, memory: 8, divergence };
    let rep = lbfgs(obj, x0, &opts)?;
    let mut run = MinRun {
        x: rep.x,
        f: rep.f,
        grad_norm: rep.grad_norm,
        iterations: rep.iterations,
        diverged: rep.diverged,
        trace: rep.trace,
    };
    if !rep.converged && !rep.diverged {
        let nr = newton_refine(obj, &run.x, tol, 50)?;
        // accept the polish only if it stays a descent result
        if nr.grad_norm < run.grad_norm && nr.f <= run.f + c::<T>(1e-10) * (T::one() + run.f.abs()) {
            run.iterations += nr.iterations;
            if nr.f < run.f {
                run.trace.push(nr.f);
            }
            run.x = nr.x;
            run.f = nr.f;
            run.grad_norm = nr.grad_norm;
        }
    }
    Ok(run)
}

/// Local minimizer of a coercive functional from `init`.
///
/// A tiny negative part (below `1e-10`) is clipped and the result polished again.
/// The zero function and sign-changing limits are not reported as solutions.
pub fn minimize<T: Scalar>(
    spec: &FunctionalSpec<T>,
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    init: &DiscreteFunction<T>,
    params: &SolverParams<T>,
) -> Result<SolveOutcome<T>> {
    params.validate(prob)?;
    let obj = MeshFunctional::family(spec, op, prob, init.mesh().clone())?;
    let mut run = run_min(&obj, init.values(), params.tol_grad, params.max_iters, params.divergence_norm)?;
    if run.diverged {
        let mut out = SolveOutcome::none(Status::NoSolutionDetected, run.iterations);
        out.energy_trace = run.trace;
        return Ok(out);
    }
    let neg = run.x.iter().fold(T::zero(), |m, v| m.max(-*v));
    if neg > T::zero() && neg < c(1e-10) {
        let clipped: Vec<T> = run.x.iter().map(|v| v.max(T::zero())).collect();
        let again = run_min(&obj, &clipped, params.tol_grad, params.max_iters, params.divergence_norm)?;
        run.iterations += again.iterations;
        run.trace.extend(again.trace.into_iter().skip(1));
        run.x = again.x;
        run.f = again.f;
        run.grad_norm = again.grad_norm;
    }
    // Near the trivial critical point the absolute tolerance is met by functions that are
    // merely small; insist on a residual small relative to the size of `u` before accepting.
    let size = run.x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let rel = c::<T>(1e-3) * init.mesh().h() * size;
    if run.grad_norm < params.tol_grad && run.grad_norm > rel && run.x.iter().all(|v| *v > T::zero()) {
        let tight = (rel * c(1e-3)).max(T::min_positive_value());
        let again = run_min(&obj, &run.x, tight, params.max_iters, params.divergence_norm)?;
        run.iterations += again.iterations;
        run.trace.extend(again.trace.into_iter().skip(1));
        run.x = again.x;
        run.f = again.f;
        run.grad_norm = again.grad_norm;
    }
    let u = init.with_values(run.x);
    let status = if run.grad_norm >= params.tol_grad {
        Status::NoConvergence
    } else if cone_check(&u, c(CONE_TOL)) == ConeStatus::InDPlus {
        Status::Solution
    } else {
        Status::NoSolutionDetected
    };
    Ok(SolveOutcome {
        status,
        u: Some(u),
        residual: run.grad_norm,
        energy_value: run.f,
        iterations: run.iterations,
        energy_trace: run.trace,
    })
}

/// Max-norm of the discrete weak residual of the untruncated problem at `u`
/// (Robin terms included, reaction evaluated at `u^+`).
pub fn residual<T: Scalar>(
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    lambda: T,
    u: &DiscreteFunction<T>,
) -> Result<T> {
    let spec = FunctionalSpec::robin_w(lambda, T::zero());
    let obj = MeshFunctional::family(&spec, op, prob, u.mesh().clone())?;
    let (_, g) = obj.value_grad(u.values())?;
    Ok(g.iter().fold(T::zero(), |m, v| m.max(v.abs())))
}

/// Energy of the untruncated functional (`RobinW` with `eta = 0`).
pub(crate) fn plain_energy<T: Scalar>(
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    lambda: T,
    u: &DiscreteFunction<T>,
) -> Result<T> {
    crate::energy::energy(&FunctionalSpec::robin_w(lambda, T::zero()), op, prob, u)
}
