//! Monotone iteration from the auxiliary solution up to the minimal positive solution.

use super::{plain_energy, residual, run_min, solve_auxiliary, SolveOutcome, SolverParams, Status, CONE_TOL};
use crate::energy::{GradTerm, MeshFunctional};
use crate::error::{Error, Result};
use crate::mesh::{c1_distance, cone_check, ConeStatus, DiscreteFunction};
use crate::operator::OperatorSpec;
use crate::problem::{estimate_xi_hat, eval_f, ProblemSpec};
use crate::scalar::{c, pos_pow, Scalar};

/// Decrease that signals an insufficient shift.
const VIOLATION: f64 = 1e-9;

enum Pass<T> {
    Done(SolveOutcome<T>),
    Violation { decrease: T, node: usize },
}

fn shift_for<T: Scalar>(prob: &ProblemSpec<T>, params: &SolverParams<T>, lambda: T, rho: T) -> Result<T> {
    let xi_hat = match params.xi_hat {
        Some(v) => v,
        None => estimate_xi_hat(prob, rho)?,
    };
    // (lambda + eta) x^{p-1} + f must be nondecreasing, also for negative lambda
    Ok(params.eta(prob).max(xi_hat + T::one() + (-lambda).max(T::zero())))
}

fn run<T: Scalar>(
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    lambda: T,
    params: &SolverParams<T>,
    u0: &DiscreteFunction<T>,
    mut eta: T,
) -> Result<Pass<T>> {
    let mesh = u0.mesh().clone();
    let nodes = mesh.nodes();
    let xi = prob.xi_nodes(&mesh);
    let p = prob.p;
    let pm1 = p - T::one();
    let tol = params.tol_grad;
    // Tolerances are relative to max(1, ||u||_inf): near the threshold the branch grows
    // large and roundoff in the stiffness term alone exceeds any absolute target.
    let inner_tol = tol * c::<T>(0.1) * mesh.h().min(T::one());
    let mut rho = c::<T>(2.0) * u0.max_abs().max(T::one());
    let mut sub = MeshFunctional::linear(
        GradTerm::Op(op),
        mesh.clone(),
        prob.beta,
        xi.iter().map(|x| *x + eta).collect(),
        p,
        vec![T::zero(); xi.len()],
    );
    let mut u = u0.values().to_vec();
    let mut trace = vec![plain_energy(op, prob, lambda, u0)?];
    let mut last_incr = T::infinity();
    for it in 1..=params.max_iters {
        let top = u.iter().fold(T::zero(), |m, v| m.max(*v));
        if top > rho && params.xi_hat.is_none() {
            rho = c::<T>(2.0) * top;
            let needed = shift_for(prob, params, lambda, rho)?;
            if needed > eta {
                eta = needed;
                sub = MeshFunctional::linear(
                    GradTerm::Op(op),
                    mesh.clone(),
                    prob.beta,
                    xi.iter().map(|x| *x + eta).collect(),
                    p,
                    vec![T::zero(); xi.len()],
                );
            }
        }
        let rhs: Vec<T> = (0..u.len())
            .map(|i| (lambda + eta) * pos_pow(u[i], pm1) + eval_f(prob, nodes[i], u[i]))
            .collect();
        sub.set_rhs(rhs);
        let inner = run_min(&sub, &u, inner_tol * top.max(T::one()), params.max_iters, c(1e300))?;
        let mut next = inner.x;
        let (decrease, node) = next
            .iter()
            .zip(&u)
            .enumerate()
            .fold((T::zero(), 0), |(d, k), (i, (a, b))| if *b - *a > d { (*b - *a, i) } else { (d, k) });
        if decrease > c(VIOLATION) {
            return Ok(Pass::Violation { decrease, node });
        }
        if decrease > T::zero() {
            // inner-solve noise; keep the sequence monotone
            for (a, b) in next.iter_mut().zip(&u) {
                *a = a.max(*b);
            }
        }
        let prev = u0.with_values(std::mem::replace(&mut u, next));
        let cur = u0.with_values(u.clone());
        let norm = cur.max_abs();
        if !(norm <= params.divergence_norm) {
            let mut out = SolveOutcome::none(Status::NoSolutionDetected, it);
            out.energy_trace = trace;
            return Ok(Pass::Done(out));
        }
        let incr = c1_distance(&cur, &prev)?;
        if it % 16 == 0 || incr < tol {
            trace.push(plain_energy(op, prob, lambda, &cur)?);
        }
        if incr < c::<T>(0.1) * tol * norm.max(T::one()) {
            let res = residual(op, prob, lambda, &cur)?;
            if res < tol * norm.max(T::one()) {
                let status = if cone_check(&cur, c(CONE_TOL)) == ConeStatus::InDPlus {
                    Status::Solution
                } else {
                    Status::NoSolutionDetected
                };
                return Ok(Pass::Done(SolveOutcome {
                    status,
                    energy_value: plain_energy(op, prob, lambda, &cur)?,
                    u: Some(cur),
                    residual: res,
                    iterations: it,
                    energy_trace: trace,
                }));
            }
            if incr == T::zero() || incr >= last_incr {
                // stalled without reaching the residual tolerance
                return Ok(Pass::Done(SolveOutcome {
                    status: Status::NoConvergence,
                    energy_value: plain_energy(op, prob, lambda, &cur)?,
                    u: Some(cur),
                    residual: res,
                    iterations: it,
                    energy_trace: trace,
                }));
            }
        }
        last_incr = incr;
    }
    // growth persisted for the whole budget
    let cur = u0.with_values(u);
    let res = residual(op, prob, lambda, &cur)?;
    Ok(Pass::Done(SolveOutcome {
        status: Status::NoSolutionDetected,
        energy_value: plain_energy(op, prob, lambda, &cur)?,
        u: Some(cur),
        residual: res,
        iterations: params.max_iters,
        energy_trace: trace,
    }))
}

/// Minimal positive solution at `lambda`, reached from below by monotone iteration
/// started at the auxiliary solution.
///
/// Nonexistence is reported heuristically: iterates leaving the ball of radius
/// `divergence_norm`, or growth for the whole iteration budget. The residual of a
/// returned solution is below `tol_grad * max(1, ||u||_inf)`.
pub fn minimal_solution<T: Scalar>(
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    lambda: T,
    params: &SolverParams<T>,
) -> Result<SolveOutcome<T>> {
    let (aux, _) = solve_auxiliary(op, prob, lambda, params)?;
    let u0 = aux.u.expect("auxiliary solution carries its profile");
    minimal_solution_from(op, prob, lambda, params, &u0)
}

/// Monotone iteration from a given subsolution.
pub fn minimal_solution_from<T: Scalar>(
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    lambda: T,
    params: &SolverParams<T>,
    u0: &DiscreteFunction<T>,
) -> Result<SolveOutcome<T>> {
    params.validate(prob)?;
    let rho = c::<T>(2.0) * u0.max_abs().max(T::one());
    let eta = shift_for(prob, params, lambda, rho)?;
    match run(op, prob, lambda, params, u0, eta)? {
        Pass::Done(out) => Ok(out),
        Pass::Violation { .. } => match run(op, prob, lambda, params, u0, eta * c(2.0))? {
            Pass::Done(out) => Ok(out),
            Pass::Violation { decrease, node } => Err(Error::MonotoneViolation { decrease: decrease.as_f64(), node }),
        },
    }
}
