//! Parameter sweeps of the minimal branch, bracketing of `lambda*`, left
//! continuity and the Picone audit.

use rayon::prelude::*;

use crate::eigen::{principal_eigenpair_on, EigenOptions, EigenResult};
use crate::error::{Error, Result};
use crate::mesh::{c1_distance, DiscreteFunction};
use crate::operator::OperatorSpec;
use crate::problem::ProblemSpec;
use crate::scalar::{abs_pow, c, Scalar};
use crate::solve::{minimal_solution, second_solution, MountainPassParams, SolveOutcome, SolverParams, Status};

#[derive(Debug, Clone)]
pub struct SolutionBranch<T> {
    pub lambda_grid: Vec<T>,
    pub minimal: Vec<SolveOutcome<T>>,
    pub second: Option<Vec<Option<SolveOutcome<T>>>>,
    /// Last solved and first unsolved grid value, when both exist.
    pub lambda_star_estimate: Option<(T, T)>,
    pub eigen_ref: Option<EigenResult<T>>,
    /// Per-entry solver errors, as text.
    pub notes: Vec<Option<String>>,
    /// Broken branch invariants (ordering, half-line structure).
    pub violations: Vec<String>,
}

impl<T: Scalar> SolutionBranch<T> {
    /// Smallest nodal increase between consecutive solved entries.
    pub fn min_increase(&self) -> Option<T> {
        let solved: Vec<&DiscreteFunction<T>> =
            self.minimal.iter().filter(|o| o.status == Status::Solution).filter_map(|o| o.u.as_ref()).collect();
        solved
            .windows(2)
            .filter_map(|w| w[1].sub(w[0]).ok().map(|d| d.min()))
            .reduce(|a, b| a.min(b))
    }
}

fn validate_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidParameter("lambda grid must be finite and strictly ascending".into()));
    }
    Ok(())
}

pub fn sweep<T: Scalar>(
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    lambda_grid: &[T],
    params: &SolverParams<T>,
) -> Result<SolutionBranch<T>> {
    sweep_with_second(op, prob, lambda_grid, params, None)
}

/// Like [`sweep`], optionally adding a mountain-pass solution above each minimal one.
pub fn sweep_with_second<T: Scalar>(
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    lambda_grid: &[T],
    params: &SolverParams<T>,
    second: Option<&MountainPassParams<T>>,
) -> Result<SolutionBranch<T>> {
    validate_grid(lambda_grid)?;
    params.validate(prob)?;
    let entries: Vec<(SolveOutcome<T>, Option<SolveOutcome<T>>, Option<String>)> = lambda_grid
        .par_iter()
        .map(|&lambda| {
            let min = match minimal_solution(op, prob, lambda, params) {
                Ok(o) => o,
                Err(e) => return (SolveOutcome::none(Status::NoConvergence, 0), None, Some(e.to_string())),
            };
            let (sec, note) = match (second, &min.u, min.status) {
                (Some(mp), Some(u), Status::Solution) => match second_solution(op, prob, lambda, u, params, mp) {
                    Ok(s) => (Some(s), None),
                    Err(e) => (None, Some(format!("second solution: {e}"))),
                },
                _ => (None, None),
            };
            (min, sec, note)
        })
        .collect();
    let mut minimal = Vec::with_capacity(entries.len());
    let mut seconds = Vec::with_capacity(entries.len());
    let mut notes = Vec::with_capacity(entries.len());
    for (m, s, n) in entries {
        minimal.push(m);
        seconds.push(s);
        notes.push(n);
    }

    let mut violations = Vec::new();
    let mut prev: Option<(T, &DiscreteFunction<T>)> = None;
    for (lambda, out) in lambda_grid.iter().zip(&minimal) {
        if let (Status::Solution, Some(u)) = (out.status, &out.u) {
            if let Some((l0, u0)) = prev {
                let gap = u.sub(u0)?.min();
                if !(gap > T::zero()) {
                    violations.push(format!("minimal solutions at {l0} and {lambda} are not strictly ordered (min gap {gap})"));
                }
            }
            prev = Some((*lambda, u));
        }
    }
    let last_solved = lambda_grid.iter().zip(&minimal).filter(|(_, o)| o.status == Status::Solution).map(|(l, _)| *l).last();
    let first_unsolved = lambda_grid
        .iter()
        .zip(&minimal)
        .find(|(_, o)| o.status == Status::NoSolutionDetected)
        .map(|(l, _)| *l);
    if let (Some(s), Some(u)) = (last_solved, first_unsolved) {
        if u < s {
            violations.push(format!("no solution detected at {u} but a solution exists at {s}"));
        }
    }
    let lambda_star_estimate = match (last_solved, first_unsolved) {
        (Some(s), Some(u)) if s < u => Some((s, u)),
        _ => None,
    };
    let eigen_opts = EigenOptions { n_cells: params.n_cells, tol: c(1e-10), max_iters: 500, seed: params.seed };
    let eigen_ref = principal_eigenpair_on(prob.p, prob, params.mesh(prob)?, &eigen_opts).ok();
    Ok(SolutionBranch {
        lambda_grid: lambda_grid.to_vec(),
        minimal,
        second: second.map(|_| seconds),
        lambda_star_estimate,
        eigen_ref,
        notes,
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaStarInterval<T> {
    pub lo: T,
    pub hi: T,
    /// Number of minimal-solution runs spent.
    pub evaluations: usize,
}

/// Brackets `lambda* = sup { lambda : a positive solution exists }` by bisection on
/// the status of [`minimal_solution`]. The bracket is widened geometrically (up to
/// 8 times per side) until `lo` is solvable and `hi` is not.
pub fn detect_lambda_star<T: Scalar>(
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    bracket: (T, T),
    tol_lambda: T,
    params: &SolverParams<T>,
) -> Result<LambdaStarInterval<T>> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !(tol_lambda > T::zero()) {
        return Err(Error::Bracket(format!("need lo < hi and tol > 0, got ({lo}, {hi}), tol {tol_lambda}")));
    }
    let mut evaluations = 0;
    let mut solvable = |l: T| -> Result<bool> {
        evaluations += 1;
        Ok(minimal_solution(op, prob, l, params)?.status == Status::Solution)
    };
    let width = hi - lo;
    let mut grow = width;
    let mut ok = false;
    for _ in 0..=8 {
        if solvable(lo)? {
            ok = true;
            break;
        }
        hi = lo;
        lo = lo - grow;
        grow *= c(2.0);
    }
    if !ok {
        return Err(Error::Bracket(format!("no solvable parameter found down to {lo}")));
    }
    let mut grow = width;
    ok = false;
    for _ in 0..=8 {
        if !solvable(hi)? {
            ok = true;
            break;
        }
        lo = hi;
        hi = hi + grow;
        grow *= c(2.0);
    }
    if !ok {
        return Err(Error::Bracket(format!("solutions persist up to {hi}")));
    }
    while hi - lo > tol_lambda {
        let mid = (lo + hi) * c(0.5);
        if solvable(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LambdaStarInterval { lo, hi, evaluations })
}

#[derive(Debug, Clone)]
pub struct LeftContinuityReport<T> {
    pub lambda: T,
    pub deltas: Vec<T>,
    /// `c1_distance(u_{lambda - delta}, u_lambda)` per delta.
    pub distances: Vec<T>,
    pub nonincreasing: bool,
    pub passed: bool,
}

/// Threshold on the smallest distance for the report to pass.
pub const LEFT_CONTINUITY_TOL: f64 = 1e-4;

pub fn check_left_continuity<T: Scalar>(
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    lambda: T,
    deltas: &[T],
    params: &SolverParams<T>,
) -> Result<LeftContinuityReport<T>> {
    if deltas.iter().any(|d| !(*d >= T::zero())) {
        return Err(Error::InvalidParameter("deltas must be nonnegative".into()));
    }
    let solve = |l: T| -> Result<DiscreteFunction<T>> {
        let out = minimal_solution(op, prob, l, params)?;
        match (out.status, out.u) {
            (Status::Solution, Some(u)) => Ok(u),
            (s, _) => Err(Error::Precondition(format!("no minimal solution at lambda = {l} ({})", s.as_str()))),
        }
    };
    let base = solve(lambda)?;
    let others: Vec<Result<DiscreteFunction<T>>> =
        deltas.par_iter().map(|&d| if d == T::zero() { Ok(base.clone()) } else { solve(lambda - d) }).collect();
    let mut distances = Vec::with_capacity(deltas.len());
    for u in others {
        distances.push(c1_distance(&u?, &base)?);
    }
    let nonincreasing = distances.windows(2).all(|w| w[1] <= w[0]);
    let smallest = distances.iter().copied().fold(T::infinity(), T::min);
    Ok(LeftContinuityReport {
        lambda,
        deltas: deltas.to_vec(),
        passed: nonincreasing && smallest < c(LEFT_CONTINUITY_TOL),
        distances,
        nonincreasing,
    })
}

/// `int R(u1, u)` with `R = |Du1|^p - |Du|^{p-2} Du D(u1^p / u^{p-1})`, cellwise.
pub fn picone_defect<T: Scalar>(
    res: &EigenResult<T>,
    u: &DiscreteFunction<T>,
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
) -> Result<T> {
    if !op.is_p_laplace() {
        return Err(Error::NotPLaplace);
    }
    if !res.u1.same_mesh(u) {
        return Err(Error::MeshMismatch);
    }
    if !(u.min() > T::zero()) {
        return Err(Error::NotPositive);
    }
    let p = prob.p;
    let h = u.mesh().h();
    let w: Vec<T> = res.u1.values().iter().zip(u.values()).map(|(a, b)| abs_pow(*a, p) / b.powf(p - T::one())).collect();
    let du1 = res.u1.slopes();
    let du = u.slopes();
    let total: T = (0..du.len())
        .map(|k| {
            let dw = (w[k + 1] - w[k]) / h;
            abs_pow(du1[k], p) - abs_pow(du[k], p - c(2.0)) * du[k] * dw
        })
        .sum();
    Ok(total * h)
}
