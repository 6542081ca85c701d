//! Principal eigenpair of `-Delta_r u + xi |u|^{r-2} u = lambda |u|^{r-2} u` with
//! Robin ends, by shifted inverse iteration on the discrete Rayleigh quotient.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::{rayleigh, GradTerm, MeshFunctional};
use crate::error::{Error, Result};
use crate::mesh::{c1_distance, lp_norm, random_positive, DiscreteFunction, Mesh};
use crate::optim::{lbfgs, LbfgsOptions, Objective};
use crate::problem::ProblemSpec;
use crate::scalar::{c, pos_pow, signed_pow, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions<T> {
    pub n_cells: usize,
    /// Bound on the max-norm of the gradient-on-sphere residual.
    pub tol: T,
    pub max_iters: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for EigenOptions<T> {
    fn default() -> Self {
        Self { n_cells: 256, tol: c(1e-10), max_iters: 500, seed: 42 }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult<T> {
    pub lambda1: T,
    /// Positive, `||u1||_r = 1`.
    pub u1: DiscreteFunction<T>,
    pub iterations: usize,
    pub residual: T,
}

fn normalized<T: Scalar>(u: &DiscreteFunction<T>, r: T) -> Result<DiscreteFunction<T>> {
    let n = lp_norm(u, r);
    if !(n > T::zero()) {
        return Err(Error::ZeroFunction);
    }
    Ok(u.scaled(T::one() / n))
}

/// Gradient of `mu_r(u)/r - lambda ||u||_r^r / r` and the quotient `lambda` itself.
fn sphere_residual<T: Scalar>(
    quad: &MeshFunctional<'_, T>,
    r: T,
    prob: &ProblemSpec<T>,
    u: &DiscreteFunction<T>,
) -> Result<(T, T)> {
    let lambda = rayleigh(r, prob, u)?;
    let (_, mut g) = quad.value_grad(u.values())?;
    let mesh = u.mesh();
    for (i, gi) in g.iter_mut().enumerate() {
        *gi -= lambda * mesh.weight(i) * signed_pow(u.values()[i], r);
    }
    Ok((lambda, g.iter().fold(T::zero(), |m, v| m.max(v.abs()))))
}

pub(crate) fn eigen_from<T: Scalar>(
    r: T,
    prob: &ProblemSpec<T>,
    init: &DiscreteFunction<T>,
    opts: &EigenOptions<T>,
) -> Result<EigenResult<T>> {
    if !(r > T::one()) {
        return Err(Error::InvalidParameter(format!("r = {r} must exceed 1")));
    }
    if !(opts.tol > T::zero()) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let mesh: Arc<Mesh<T>> = init.mesh().clone();
    if mesh.interval() != prob.interval {
        return Err(Error::MeshMismatch);
    }
    let shift = prob.xi_inf_norm() + T::one();
    let xi = prob.xi_nodes(&mesh);
    // zero-order part of mu_r / r, for the residual
    let quad = MeshFunctional::linear(GradTerm::Power(r), mesh.clone(), prob.beta, xi.clone(), r, vec![T::zero(); xi.len()]);
    let coef: Vec<T> = xi.iter().map(|x| *x + shift).collect();
    let mut sub = MeshFunctional::linear(GradTerm::Power(r), mesh.clone(), prob.beta, coef, r, vec![T::zero(); xi.len()]);
    let inner = LbfgsOptions { tol_grad: opts.tol * c(0.01), max_iters: 2000, memory: 8, divergence: c(1e30) };

    let mut u = normalized(&init.abs(), r)?;
    let (mut lambda, mut res) = sphere_residual(&quad, r, prob, &u)?;
    let mut it = 0;
    while res >= opts.tol && it < opts.max_iters {
        it += 1;
        sub.set_rhs(u.values().iter().map(|v| pos_pow(*v, r - T::one())).collect());
        // the minimizer scales like (lambda + shift)^{-1/(r-1)}; start there
        let scale = (lambda + shift).max(T::epsilon()).powf(-T::one() / (r - T::one()));
        let start: Vec<T> = u.values().iter().map(|v| *v * scale).collect();
        let rep = lbfgs(&sub, &start, &inner)?;
        let next = if rep.converged {
            normalized(&u.with_values(rep.x).abs(), r)?
        } else {
            projected_descent(&quad, r, prob, &u)?
        };
        u = next;
        let (l, rr) = sphere_residual(&quad, r, prob, &u)?;
        if !rep.converged && rr >= res {
            return Err(Error::NoConvergence(it));
        }
        lambda = l;
        res = rr;
    }
    if res >= opts.tol {
        return Err(Error::NoConvergence(opts.max_iters));
    }
    Ok(EigenResult { lambda1: rayleigh(r, prob, &u)?, u1: u, iterations: it, residual: res })
}

/// One backtracking step along the preconditioned sphere gradient.
fn projected_descent<T: Scalar>(
    quad: &MeshFunctional<'_, T>,
    r: T,
    prob: &ProblemSpec<T>,
    u: &DiscreteFunction<T>,
) -> Result<DiscreteFunction<T>> {
    let lambda = rayleigh(r, prob, u)?;
    let (_, mut g) = quad.value_grad(u.values())?;
    for (i, gi) in g.iter_mut().enumerate() {
        *gi -= lambda * u.mesh().weight(i) * signed_pow(u.values()[i], r);
    }
    let d = match quad.precondition() {
        Some(p) => p.solve(&g).unwrap_or(g),
        None => g,
    };
    let mut step = T::one();
    for _ in 0..60 {
        let trial: Vec<T> = u.values().iter().zip(&d).map(|(v, di)| *v - step * *di).collect();
        let cand = normalized(&u.with_values(trial).abs(), r)?;
        if rayleigh(r, prob, &cand)? < lambda {
            return Ok(cand);
        }
        step *= c(0.5);
    }
    Ok(u.clone())
}

pub fn principal_eigenpair<T: Scalar>(r: T, prob: &ProblemSpec<T>, opts: &EigenOptions<T>) -> Result<EigenResult<T>> {
    let mesh = Mesh::shared(prob.interval.0, prob.interval.1, opts.n_cells)?;
    eigen_from(r, prob, &DiscreteFunction::constant(mesh, T::one()), opts)
}

/// Principal eigenpair on a given mesh.
pub fn principal_eigenpair_on<T: Scalar>(
    r: T,
    prob: &ProblemSpec<T>,
    mesh: Arc<Mesh<T>>,
    opts: &EigenOptions<T>,
) -> Result<EigenResult<T>> {
    eigen_from(r, prob, &DiscreteFunction::constant(mesh, T::one()), opts)
}

#[derive(Debug, Clone)]
pub struct SimplicityReport<T> {
    pub starts: usize,
    pub max_c1_distance: T,
    pub lambda_spread: T,
    /// Starts that failed to converge; they do not enter the statistics.
    pub failures: usize,
}

/// Reruns the eigen solver from seeded random positive starts and compares the results.
pub fn check_simplicity<T: Scalar>(
    res: &EigenResult<T>,
    prob: &ProblemSpec<T>,
    r: T,
    n_starts: usize,
    opts: &EigenOptions<T>,
) -> Result<SimplicityReport<T>> {
    if n_starts < 5 {
        return Err(Error::InvalidParameter(format!("n_starts = {n_starts} < 5")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mesh = res.u1.mesh().clone();
    let mut worst = T::zero();
    let (mut lo, mut hi) = (res.lambda1, res.lambda1);
    let mut failures = 0;
    for _ in 0..n_starts {
        let init = random_positive(&mesh, &mut rng);
        match eigen_from(r, prob, &init, opts) {
            Ok(other) => {
                worst = worst.max(c1_distance(&other.u1, &res.u1)?);
                lo = lo.min(other.lambda1);
                hi = hi.max(other.lambda1);
            }
            Err(_) => failures += 1,
        }
    }
    Ok(SimplicityReport { starts: n_starts, max_c1_distance: worst, lambda_spread: hi - lo, failures })
}
