//! Mountain-pass critical points by max-point path deformation.

use super::{residual, SolveOutcome, SolverParams, Status, CONE_TOL};
use crate::energy::{Family, FunctionalSpec, MeshFunctional};
use crate::error::{Error, Result};
use crate::mesh::{c1_distance, cone_check, ConeStatus, DiscreteFunction};
use crate::operator::OperatorSpec;
use crate::optim::{deform_path, Objective, PathOptions};
use crate::problem::ProblemSpec;
use crate::scalar::{c, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MountainPassParams<T> {
    /// Points on the discrete path, endpoints included.
    pub path_points: usize,
    /// Initial far endpoint is `endpoint_scale * max(1, ||u_low||_inf)` times the constant 1; doubled until it is lower.
    pub endpoint_scale: T,
    pub deform_steps: usize,
    /// Gradient max-norm at the path maximum that ends the deformation phase.
    pub descent_tol: T,
    /// Amplitude (relative to the far endpoint) of the symmetry-breaking bump on the initial path.
    pub tilt: T,
}

impl<T: Scalar> Default for MountainPassParams<T> {
    fn default() -> Self {
        Self { path_points: 41, endpoint_scale: c(2.0), deform_steps: 20_000, descent_tol: c(1e-6), tilt: c(0.05) }
    }
}

/// Critical point of mountain-pass type between `u_low` and a far constant.
pub fn mountain_pass<T: Scalar>(
    spec: &FunctionalSpec<T>,
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    u_low: &DiscreteFunction<T>,
    params: &SolverParams<T>,
    mp: &MountainPassParams<T>,
) -> Result<SolveOutcome<T>> {
    if !matches!(spec.family, Family::SuperPsi | Family::TruncFloor) {
        return Err(Error::Precondition(format!("mountain pass needs SuperPsi or TruncFloor, got {:?}", spec.family)));
    }
    if mp.path_points < 5 {
        return Err(Error::InvalidParameter(format!("path_points = {} < 5", mp.path_points)));
    }
    params.validate(prob)?;
    let mesh = u_low.mesh().clone();
    let obj = MeshFunctional::family(spec, op, prob, mesh.clone())?;
    let low = u_low.values().to_vec();
    let e_low = obj.eval(&low, None)?;

    let mut t = mp.endpoint_scale * u_low.max_abs().max(T::one());
    let n = low.len();
    let mut found = false;
    for _ in 0..60 {
        if obj.eval(&vec![t; n], None)? < e_low {
            found = true;
            break;
        }
        t *= c(2.0);
    }
    if !found {
        return Err(Error::NoConvergence(60));
    }

    let (a, len) = (mesh.interval().0, mesh.length());
    let pi = c::<T>(std::f64::consts::PI);
    let bump: Vec<T> = mesh.nodes().into_iter().map(|z| (pi * (z - a) / len).cos()).collect();
    let m = mp.path_points;
    let path: Vec<Vec<T>> = (0..m)
        .map(|k| {
            let s = T::from_usize(k).unwrap() / T::from_usize(m - 1).unwrap();
            let w = mp.tilt * t * (pi * s).sin();
            (0..n).map(|i| low[i] + s * (t - low[i]) + w * bump[i]).collect()
        })
        .collect();
    let opts = PathOptions {
        deform_steps: mp.deform_steps,
        descent_tol: mp.descent_tol,
        tol_grad: params.tol_grad,
        collapse_limit: m,
        newton_iters: 100,
    };
    let rep = deform_path(&obj, path, &opts)?;
    let u = u_low.with_values(rep.x);
    if c1_distance(&u, u_low)? < c(1e-6) {
        return Err(Error::PathCollapse);
    }
    let status = if rep.grad_norm >= params.tol_grad {
        Status::NoConvergence
    } else if cone_check(&u, c(CONE_TOL)) == ConeStatus::InDPlus {
        Status::Solution
    } else {
        Status::NoSolutionDetected
    };
    Ok(SolveOutcome {
        status,
        u: Some(u),
        residual: rep.grad_norm,
        energy_value: rep.level,
        iterations: rep.steps + rep.newton_iterations,
        energy_trace: vec![e_low, rep.level],
    })
}

/// A second positive solution above the minimal one, from the functional whose
/// reaction is frozen below `u_min`.
pub fn second_solution<T: Scalar>(
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    lambda: T,
    u_min: &DiscreteFunction<T>,
    params: &SolverParams<T>,
    mp: &MountainPassParams<T>,
) -> Result<SolveOutcome<T>> {
    if !prob.flags().superlinear_h2 {
        return Err(Error::Precondition("second solutions need a superlinear reaction".into()));
    }
    let spec = FunctionalSpec::trunc_floor(lambda, params.eta(prob), u_min.clone());
    let mut out = mountain_pass(&spec, op, prob, u_min, params, mp)?;
    if let Some(u) = &out.u {
        let gap = u.sub(u_min)?.min();
        if gap < c(-1e-9) {
            return Err(Error::Postcondition(format!("second solution dips below the minimal one by {}", -gap)));
        }
        let d = c1_distance(u, u_min)?;
        if d <= c(1e-6) {
            return Err(Error::Postcondition(format!("second solution coincides with the minimal one (distance {d})")));
        }
        out.residual = residual(op, prob, lambda, u)?;
        if out.status == Status::Solution && out.residual >= params.tol_grad {
            out.status = Status::NoConvergence;
        }
    }
    Ok(out)
}
