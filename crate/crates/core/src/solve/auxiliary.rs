//! The auxiliary problem with reaction `c9 x^{q-1} - c10 x^{r-1}`, whose unique
//! positive solution lies below every positive solution at the same `lambda`.

use std::sync::Arc;

use super::{minimize, SolveOutcome, SolverParams};
use crate::energy::FunctionalSpec;
use crate::error::{Error, Result};
use crate::mesh::{DiscreteFunction, Mesh};
use crate::numerics::log_spaced;
use crate::operator::OperatorSpec;
use crate::problem::{eval_f, AuxCoeffs, ProblemSpec};
use crate::scalar::{c, Scalar};

const COEFF_CAP: f64 = 1e6;

/// Minimizes the auxiliary functional for given coefficients, starting from the
/// constant where the auxiliary reaction vanishes.
pub fn solve_auxiliary_with<T: Scalar>(
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    aux: AuxCoeffs<T>,
    mesh: Arc<Mesh<T>>,
    params: &SolverParams<T>,
) -> Result<SolveOutcome<T>> {
    let root = (aux.c9 / aux.c10).powf(T::one() / (aux.r_exp - aux.q_exp));
    let init = DiscreteFunction::constant(mesh, root);
    minimize(&FunctionalSpec::aux_psi(aux), op, prob, &init, params)
}

/// Certifies `c9 x^{q-1} - c10 x^{r-1} <= lambda x^{p-1} + f(z, x)` on a log grid
/// and returns the auxiliary solution with the largest certified `c9`.
pub fn solve_auxiliary<T: Scalar>(
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    lambda: T,
    params: &SolverParams<T>,
) -> Result<(SolveOutcome<T>, AuxCoeffs<T>)> {
    params.validate(prob)?;
    let p = prob.p;
    let q = op.q_convexity;
    let r = params.aux_r.unwrap_or(p + c(2.0));
    if !(r > p) {
        return Err(Error::InvalidParameter(format!("auxiliary exponent r = {r} must exceed p = {p}")));
    }
    let mesh = params.mesh(prob)?;
    let xs = log_spaced(c::<T>(1e-8), c::<T>(10.0) * params.divergence_norm, 512);
    let zs: Vec<T> = mesh.nodes().into_iter().step_by((mesh.n_nodes() / 8).max(1)).collect();
    let rows: Vec<(T, T, T, T)> = zs
        .iter()
        .flat_map(|&z| {
            xs.iter().map(move |&x| {
                let floor = lambda * x.powf(p - T::one()) + eval_f(prob, z, x);
                (x.powf(q - T::one()), floor, x.powf(r - T::one()), x)
            })
        })
        .collect();
    let cap = c::<T>(COEFF_CAP);
    for k in (-20..=20).rev() {
        let c9 = c::<T>(2f64.powi(k));
        let need = rows.iter().fold(T::neg_infinity(), |m, &(xq, floor, xr, _)| m.max((c9 * xq - floor) / xr));
        if !need.is_finite() {
            continue;
        }
        let c10 = (need * c(1.0 + 1e-9)).max(c(2f64.powi(-30)));
        if c10 > cap {
            continue;
        }
        let aux = AuxCoeffs { c9, c10, q_exp: q, r_exp: r };
        let out = solve_auxiliary_with(op, prob, aux, mesh.clone(), params)?;
        if out.is_solution() {
            return Ok((out, aux));
        }
    }
    Err(Error::CoefficientSearchFailed)
}
