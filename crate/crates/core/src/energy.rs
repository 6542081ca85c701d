//! Discrete energy functionals and their exact nodal gradients.
//!
//! Every functional has the shape
//!
//! ```text
//! E(u) = g_w * sum_cells h G0(|Du|) + sum_nodes W_i Z_i(u_i) + b_w * (beta_L |u_0|^e + beta_R |u_n|^e)
//! ```
//!
//! with trapezoid weights `W_i`; only the nodal density `Z_i` depends on the family.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{DiscreteFunction, Mesh};
use crate::numerics::Tridiag;
use crate::operator::OperatorSpec;
use crate::optim::Objective;
use crate::problem::{eval_F, eval_f, AuxCoeffs, ProblemSpec, TruncatedReaction, TruncationMode};
use crate::scalar::{abs_pow, c, pos_pow, signed_pow, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `int p G(Du) + int xi |u|^p + beta-term`.
    Mu,
    /// `mu/p + (eta/p) ||u||_p^p - int E(u)`, with `E` the primitive of the shifted reaction.
    PhiLambda,
    /// Reaction frozen above the barrier (optionally the auxiliary reaction).
    TruncCap,
    /// Reaction frozen below the barrier.
    TruncFloor,
    /// The auxiliary barrier functional with coefficients `c9, c10`.
    AuxPsi,
    /// `mu/p + (eta/p) ||u^-||_p^p - (lambda/p) ||u^+||_p^p - int F(u^+)`.
    SuperPsi,
    /// Same density as `SuperPsi`; `eta = 0` gives the plain weak residual.
    RobinW,
}

#[derive(Debug, Clone)]
pub struct FunctionalSpec<T> {
    pub family: Family,
    pub lambda: T,
    pub eta: T,
    pub barrier: Option<DiscreteFunction<T>>,
    pub aux_coeffs: Option<AuxCoeffs<T>>,
}

impl<T: Scalar> FunctionalSpec<T> {
    fn plain(family: Family, lambda: T, eta: T) -> Self {
        Self { family, lambda, eta, barrier: None, aux_coeffs: None }
    }

    pub fn mu() -> Self {
        Self::plain(Family::Mu, T::zero(), T::zero())
    }

    pub fn phi_lambda(lambda: T, eta: T) -> Self {
        Self::plain(Family::PhiLambda, lambda, eta)
    }

    pub fn trunc_cap(lambda: T, eta: T, barrier: DiscreteFunction<T>) -> Self {
        Self { barrier: Some(barrier), ..Self::plain(Family::TruncCap, lambda, eta) }
    }

    pub fn trunc_floor(lambda: T, eta: T, barrier: DiscreteFunction<T>) -> Self {
        Self { barrier: Some(barrier), ..Self::plain(Family::TruncFloor, lambda, eta) }
    }

    pub fn aux_psi(aux: AuxCoeffs<T>) -> Self {
        Self { aux_coeffs: Some(aux), ..Self::plain(Family::AuxPsi, T::zero(), T::zero()) }
    }

    pub fn super_psi(lambda: T, eta: T) -> Self {
        Self::plain(Family::SuperPsi, lambda, eta)
    }

    pub fn robin_w(lambda: T, eta: T) -> Self {
        Self::plain(Family::RobinW, lambda, eta)
    }

    /// Replaces the base reaction of a `TruncCap` functional with the auxiliary one.
    pub fn with_aux(mut self, aux: AuxCoeffs<T>) -> Self {
        self.aux_coeffs = Some(aux);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::AuxPsi if self.aux_coeffs.is_none() => {
                Err(Error::InvalidParameter("AuxPsi needs aux_coeffs".into()))
            }
            Family::TruncCap | Family::TruncFloor if self.barrier.is_none() => Err(Error::BarrierMissing),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum GradTerm<'a, T> {
    Op(&'a OperatorSpec<T>),
    /// `|t|^r / r`.
    Power(T),
}

impl<T: Scalar> GradTerm<'_, T> {
    #[inline]
    fn g0(&self, t: T) -> T {
        match self {
            Self::Op(op) => op.eval_g0(t.abs()),
            Self::Power(r) => abs_pow(t, *r) / *r,
        }
    }

    #[inline]
    fn a(&self, y: T) -> T {
        match self {
            Self::Op(op) => op.eval_a(y),
            Self::Power(r) => signed_pow(y, *r),
        }
    }
}

#[derive(Debug)]
enum ZeroOrder<'a, T> {
    Family { spec: &'a FunctionalSpec<T>, prob: &'a ProblemSpec<T>, tr: Option<TruncatedReaction<T>> },
    /// `coef_i |x|^e / e - rhs_i x`.
    Linear { coef: Vec<T>, exp: T, rhs: Vec<T> },
}

/// A functional assembled on a fixed mesh.
#[derive(Debug)]
pub(crate) struct MeshFunctional<'a, T> {
    mesh: Arc<Mesh<T>>,
    nodes: Vec<T>,
    weights: Vec<T>,
    xi: Vec<T>,
    grad_term: GradTerm<'a, T>,
    g_weight: T,
    zero: ZeroOrder<'a, T>,
    beta: (T, T),
    b_weight: T,
    b_exp: T,
    mass: Vec<T>,
}

fn check_mesh<T: Scalar>(mesh: &Mesh<T>, prob: &ProblemSpec<T>) -> Result<()> {
    if mesh.interval() != prob.interval {
        return Err(Error::MeshMismatch);
    }
    Ok(())
}

impl<'a, T: Scalar> MeshFunctional<'a, T> {
    pub(crate) fn family(
        spec: &'a FunctionalSpec<T>,
        op: &'a OperatorSpec<T>,
        prob: &'a ProblemSpec<T>,
        mesh: Arc<Mesh<T>>,
    ) -> Result<Self> {
        spec.validate()?;
        check_mesh(&mesh, prob)?;
        if op.p != prob.p {
            return Err(Error::InvalidParameter(format!("operator p = {} but problem p = {}", op.p, prob.p)));
        }
        if let Some(b) = &spec.barrier {
            if *b.mesh().as_ref() != *mesh {
                return Err(Error::MeshMismatch);
            }
        }
        let p = prob.p;
        let mode = match spec.family {
            Family::PhiLambda => Some(TruncationMode::PlainShifted),
            Family::TruncCap => Some(TruncationMode::CapAbove),
            Family::TruncFloor => Some(TruncationMode::FloorBelow),
            _ => None,
        };
        let tr = match mode {
            Some(m) => {
                let tr = TruncatedReaction::new(m, spec.lambda, spec.eta, spec.barrier.clone(), prob)?;
                Some(match (spec.family, spec.aux_coeffs) {
                    (Family::TruncCap, Some(aux)) => tr.with_aux(aux),
                    _ => tr,
                })
            }
            None => None,
        };
        let (g_weight, b_weight) = match spec.family {
            Family::Mu => (p, T::one()),
            _ => (T::one(), T::one() / p),
        };
        let xi = prob.xi_nodes(&mesh);
        let mass = xi.iter().map(|x| x.abs() + T::one()).collect();
        Ok(Self {
            nodes: mesh.nodes(),
            weights: (0..mesh.n_nodes()).map(|i| mesh.weight(i)).collect(),
            mesh,
            xi,
            grad_term: GradTerm::Op(op),
            g_weight,
            zero: ZeroOrder::Family { spec, prob, tr },
            beta: prob.beta,
            b_weight,
            b_exp: p,
            mass,
        })
    }

    /// `int G(Du) + (1/e) int coef |u|^e + (1/e) beta-term - int rhs u`.
    pub(crate) fn linear(
        grad_term: GradTerm<'a, T>,
        mesh: Arc<Mesh<T>>,
        beta: (T, T),
        coef: Vec<T>,
        exp: T,
        rhs: Vec<T>,
    ) -> Self {
        let mass = coef.iter().map(|c| c.abs().max(T::epsilon())).collect();
        Self {
            nodes: mesh.nodes(),
            weights: (0..mesh.n_nodes()).map(|i| mesh.weight(i)).collect(),
            xi: vec![T::zero(); mesh.n_nodes()],
            mesh,
            grad_term,
            g_weight: T::one(),
            zero: ZeroOrder::Linear { coef, exp, rhs },
            beta,
            b_weight: T::one() / exp,
            b_exp: exp,
            mass,
        }
    }

    /// Replaces the linear term of a `linear` functional.
    pub(crate) fn set_rhs(&mut self, new_rhs: Vec<T>) {
        if let ZeroOrder::Linear { rhs, .. } = &mut self.zero {
            *rhs = new_rhs;
        }
    }

    /// Nodal density and its derivative.
    fn density(&self, i: usize, x: T) -> Result<(T, T)> {
        let xi = self.xi[i];
        let z = self.nodes[i];
        match &self.zero {
            ZeroOrder::Linear { coef, exp, rhs } => {
                Ok((coef[i] * abs_pow(x, *exp) / *exp - rhs[i] * x, coef[i] * signed_pow(x, *exp) - rhs[i]))
            }
            ZeroOrder::Family { spec, prob, tr } => {
                let p = prob.p;
                let pm1 = p - T::one();
                let neg = (-x).max(T::zero());
                let pos = x.max(T::zero());
                Ok(match spec.family {
                    Family::Mu => (xi * abs_pow(x, p), p * xi * signed_pow(x, p)),
                    Family::PhiLambda | Family::TruncCap | Family::TruncFloor => {
                        let tr = tr.as_ref().expect("truncated family carries its reaction");
                        let s = xi + spec.eta;
                        (
                            s * abs_pow(x, p) / p - tr.primitive(prob, z, i, x)?,
                            s * signed_pow(x, p) - tr.value(prob, z, i, x)?,
                        )
                    }
                    Family::AuxPsi => {
                        let aux = spec.aux_coeffs.expect("validated");
                        (
                            xi.abs() * abs_pow(x, p) / p + pos_pow(neg, p) / p - aux.primitive(x),
                            xi.abs() * signed_pow(x, p) - pos_pow(neg, pm1) - aux.reaction(x),
                        )
                    }
                    Family::SuperPsi | Family::RobinW => (
                        xi * abs_pow(x, p) / p + spec.eta * pos_pow(neg, p) / p
                            - spec.lambda * pos_pow(pos, p) / p
                            - eval_F(prob, z, pos)?,
                        xi * signed_pow(x, p) - spec.eta * pos_pow(neg, pm1) - spec.lambda * pos_pow(pos, pm1)
                            - eval_f(prob, z, pos),
                    ),
                })
            }
        }
    }

    pub(crate) fn value_at(&self, u: &[T]) -> Result<T> {
        self.eval(u, None)
    }
}

impl<T: Scalar> Objective<T> for MeshFunctional<'_, T> {
    fn dim(&self) -> usize {
        self.mesh.n_nodes()
    }

    fn eval(&self, u: &[T], mut grad: Option<&mut [T]>) -> Result<T> {
        let n = u.len();
        if n != self.mesh.n_nodes() {
            return Err(Error::MeshMismatch);
        }
        let h = self.mesh.h();
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = T::zero());
        }
        let mut e_grad = T::zero();
        for cell in 0..n - 1 {
            let s = (u[cell + 1] - u[cell]) / h;
            e_grad += self.grad_term.g0(s);
            if let Some(g) = grad.as_deref_mut() {
                let a = self.g_weight * self.grad_term.a(s);
                g[cell + 1] += a;
                g[cell] -= a;
            }
        }
        let mut e_zero = T::zero();
        for i in 0..n {
            let (z, dz) = self.density(i, u[i])?;
            e_zero += self.weights[i] * z;
            if let Some(g) = grad.as_deref_mut() {
                g[i] += self.weights[i] * dz;
            }
        }
        let e = self.b_exp;
        let mut e_bnd = T::zero();
        for (idx, b) in [(0, self.beta.0), (n - 1, self.beta.1)] {
            e_bnd += b * abs_pow(u[idx], e);
            if let Some(g) = grad.as_deref_mut() {
                g[idx] += self.b_weight * b * e * signed_pow(u[idx], e);
            }
        }
        Ok(self.g_weight * h * e_grad + e_zero + self.b_weight * e_bnd)
    }

    fn precondition(&self) -> Option<Tridiag<T>> {
        let n = self.mesh.n_nodes();
        let h = self.mesh.h();
        let k = self.g_weight / h;
        let mut m = Tridiag::zeros(n);
        for cell in 0..n - 1 {
            m.diag[cell] += k;
            m.diag[cell + 1] += k;
            m.lower[cell] = -k;
            m.upper[cell] = -k;
        }
        for i in 0..n {
            m.diag[i] += self.weights[i] * self.mass[i];
        }
        let e = self.b_exp;
        let bc = self.b_weight * e * (e - T::one()).max(c(0.1));
        m.diag[0] += bc * self.beta.0;
        m.diag[n - 1] += bc * self.beta.1;
        Some(m)
    }
}

pub fn energy<T: Scalar>(
    spec: &FunctionalSpec<T>,
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    u: &DiscreteFunction<T>,
) -> Result<T> {
    MeshFunctional::family(spec, op, prob, u.mesh().clone())?.value_at(u.values())
}

/// Nodal gradient of [`energy`]; the `i`-th entry is the derivative with respect to `u_i`.
pub fn gradient<T: Scalar>(
    spec: &FunctionalSpec<T>,
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
    u: &DiscreteFunction<T>,
) -> Result<DiscreteFunction<T>> {
    let f = MeshFunctional::family(spec, op, prob, u.mesh().clone())?;
    let (_, g) = f.value_grad(u.values())?;
    Ok(u.with_values(g))
}

pub fn assemble_mu<T: Scalar>(op: &OperatorSpec<T>, prob: &ProblemSpec<T>, u: &DiscreteFunction<T>) -> Result<T> {
    energy(&FunctionalSpec::mu(), op, prob, u)
}

/// Numerator of the Rayleigh quotient with exponent `r`:
/// `||Du||_r^r + int xi |u|^r + beta-term`.
pub fn mu_r<T: Scalar>(r: T, prob: &ProblemSpec<T>, u: &DiscreteFunction<T>) -> Result<T> {
    let mesh = u.mesh();
    check_mesh(mesh, prob)?;
    let h = mesh.h();
    let v = u.values();
    let grad: T = v.windows(2).map(|w| abs_pow((w[1] - w[0]) / h, r)).sum::<T>() * h;
    let zero: T = (0..v.len()).map(|i| mesh.weight(i) * prob.xi_at(mesh.node(i)) * abs_pow(v[i], r)).sum();
    let bnd = prob.beta.0 * abs_pow(v[0], r) + prob.beta.1 * abs_pow(v[v.len() - 1], r);
    Ok(grad + zero + bnd)
}

pub fn rayleigh<T: Scalar>(r: T, prob: &ProblemSpec<T>, u: &DiscreteFunction<T>) -> Result<T> {
    let den = crate::mesh::lp_norm_pow(u, r);
    if !(den > T::zero()) {
        return Err(Error::ZeroFunction);
    }
    Ok(mu_r(r, prob, u)? / den)
}

/// Two positive functions whose `q`-th powers span the segment on which the
/// convexity of `l(w) = int G(D w^{1/q}) + (1/p) int |xi| w^{p/q} + (1/p) beta-term` is sampled.
#[derive(Debug, Clone)]
pub struct DiazSaaProbe<T> {
    pub u1: DiscreteFunction<T>,
    pub u2: DiscreteFunction<T>,
    pub samples: usize,
    pub q_convexity: T,
}

#[derive(Debug, Clone)]
pub struct DiazSaaReport<T> {
    pub values: Vec<T>,
    pub max_violation: T,
}

fn diaz_saa_l<T: Scalar>(op: &OperatorSpec<T>, prob: &ProblemSpec<T>, w: &DiscreteFunction<T>, q: T) -> T {
    let mesh = w.mesh();
    let p = prob.p;
    let u = w.map(|x| x.max(T::zero()).powf(T::one() / q));
    let grad: T = u.slopes().into_iter().map(|s| op.eval_g0(s.abs())).sum::<T>() * mesh.h();
    let vals = w.values();
    let zero: T = (0..vals.len())
        .map(|i| mesh.weight(i) * prob.xi_at(mesh.node(i)).abs() * pos_pow(vals[i], p / q))
        .sum();
    let n = vals.len() - 1;
    let bnd = prob.beta.0 * pos_pow(vals[0], p / q) + prob.beta.1 * pos_pow(vals[n], p / q);
    grad + (zero + bnd) / p
}

pub fn diaz_saa_convexity<T: Scalar>(
    probe: &DiazSaaProbe<T>,
    op: &OperatorSpec<T>,
    prob: &ProblemSpec<T>,
) -> Result<DiazSaaReport<T>> {
    if probe.samples < 3 {
        return Err(Error::InvalidParameter("need at least 3 samples along the segment".into()));
    }
    if !probe.u1.same_mesh(&probe.u2) {
        return Err(Error::MeshMismatch);
    }
    check_mesh(probe.u1.mesh(), prob)?;
    if !(probe.u1.min() > T::zero() && probe.u2.min() > T::zero()) {
        return Err(Error::NotPositive);
    }
    let q = probe.q_convexity;
    let w1 = probe.u1.map(|x| x.powf(q));
    let w2 = probe.u2.map(|x| x.powf(q));
    let last = T::from_usize(probe.samples - 1).unwrap();
    let values: Vec<T> = (0..probe.samples)
        .map(|j| {
            let t = T::from_usize(j).unwrap() / last;
            let w = w1.with_values(
                w1.values().iter().zip(w2.values()).map(|(a, b)| (T::one() - t) * *a + t * *b).collect(),
            );
            diaz_saa_l(op, prob, &w, q)
        })
        .collect();
    let (l0, l1) = (values[0], values[probe.samples - 1]);
    let mut worst = T::zero();
    for (j, &v) in values.iter().enumerate() {
        let t = T::from_usize(j).unwrap() / last;
        worst = worst.max(v - ((T::one() - t) * l0 + t * l1));
        if j > 0 && j + 1 < values.len() {
            worst = worst.max(v - (values[j - 1] + values[j + 1]) * c(0.5));
        }
    }
    Ok(DiazSaaReport { values, max_violation: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{PerturbationSpec, XiSpec};
    use approx::assert_abs_diff_eq;

    fn setup(xi: f64, beta: (f64, f64), f: PerturbationSpec<f64>) -> (OperatorSpec<f64>, ProblemSpec<f64>, Arc<Mesh<f64>>) {
        let op = OperatorSpec::p_laplace(2.0).unwrap();
        let prob = ProblemSpec::new((0.0, 1.0), XiSpec::Const(xi), beta, f, 2.0).unwrap();
        (op, prob, Mesh::shared(0.0, 1.0, 16).unwrap())
    }

    #[test]
    fn mu_examples() {
        let (op, prob, mesh) = setup(1.0, (0.0, 0.0), PerturbationSpec::zero(2.0).unwrap());
        let one = DiscreteFunction::constant(mesh.clone(), 1.0);
        assert_abs_diff_eq!(assemble_mu(&op, &prob, &one).unwrap(), 1.0, epsilon = 1e-14);
        let (_, prob_b, _) = setup(1.0, (1.0, 1.0), PerturbationSpec::zero(2.0).unwrap());
        assert_abs_diff_eq!(assemble_mu(&op, &prob_b, &one).unwrap(), 3.0, epsilon = 1e-14);
        let (_, prob0, _) = setup(0.0, (0.0, 0.0), PerturbationSpec::zero(2.0).unwrap());
        let lin = DiscreteFunction::from_fn(mesh, |z| z).unwrap();
        assert_abs_diff_eq!(assemble_mu(&op, &prob0, &lin).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn phi_lambda_example() {
        let (op, prob, mesh) = setup(0.0, (0.0, 0.0), PerturbationSpec::zero(2.0).unwrap());
        let one = DiscreteFunction::constant(mesh, 1.0);
        let e = energy(&FunctionalSpec::phi_lambda(0.0, 1.0), &op, &prob, &one).unwrap();
        assert_abs_diff_eq!(e, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn aux_psi_example() {
        let (op, prob, mesh) = setup(1.0, (0.0, 0.0), PerturbationSpec::zero(2.0).unwrap());
        let one = DiscreteFunction::constant(mesh, 1.0);
        let aux = AuxCoeffs { c9: 2.0, c10: 1.0, q_exp: 2.0, r_exp: 4.0 };
        let e = energy(&FunctionalSpec::aux_psi(aux), &op, &prob, &one).unwrap();
        assert_abs_diff_eq!(e, -0.25, epsilon = 1e-14);
        let g = gradient(&FunctionalSpec::aux_psi(aux), &op, &prob, &one).unwrap();
        assert!(g.max_abs() < 1e-14);
    }

    #[test]
    fn mu_gradient_vanishes_on_constants() {
        let (op, prob, mesh) = setup(0.0, (0.0, 0.0), PerturbationSpec::zero(2.0).unwrap());
        let g = gradient(&FunctionalSpec::mu(), &op, &prob, &DiscreteFunction::constant(mesh, 1.0)).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn rayleigh_examples() {
        let (_, prob, mesh) = setup(0.0, (0.0, 0.0), PerturbationSpec::zero(2.0).unwrap());
        let one = DiscreteFunction::constant(mesh.clone(), 1.0);
        assert_abs_diff_eq!(rayleigh(2.0, &prob, &one).unwrap(), 0.0);
        let (_, prob_c, _) = setup(3.5, (0.0, 0.0), PerturbationSpec::zero(2.0).unwrap());
        assert_abs_diff_eq!(rayleigh(2.0, &prob_c, &one).unwrap(), 3.5, epsilon = 1e-14);
        let (_, prob_b, _) = setup(0.0, (1.0, 1.0), PerturbationSpec::zero(2.0).unwrap());
        assert_abs_diff_eq!(rayleigh(2.0, &prob_b, &one).unwrap(), 2.0, epsilon = 1e-14);
        let zero = DiscreteFunction::constant(mesh, 0.0);
        assert_eq!(rayleigh(2.0, &prob, &zero).unwrap_err(), Error::ZeroFunction);
    }

    #[test]
    fn missing_barrier_and_aux() {
        let (op, prob, mesh) = setup(0.0, (0.0, 0.0), PerturbationSpec::zero(2.0).unwrap());
        let u = DiscreteFunction::constant(mesh, 1.0);
        let mut spec = FunctionalSpec::phi_lambda(0.0, 1.0);
        spec.family = Family::TruncFloor;
        assert_eq!(energy(&spec, &op, &prob, &u).unwrap_err(), Error::BarrierMissing);
        spec.family = Family::AuxPsi;
        assert!(matches!(energy(&spec, &op, &prob, &u), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn diaz_saa_constants() {
        let (op, prob, mesh) = setup(1.0, (0.5, 0.5), PerturbationSpec::zero(2.0).unwrap());
        let probe = DiazSaaProbe {
            u1: DiscreteFunction::constant(mesh.clone(), 1.0),
            u2: DiscreteFunction::constant(mesh, 2.0),
            samples: 11,
            q_convexity: 2.0,
        };
        assert!(diaz_saa_convexity(&probe, &op, &prob).unwrap().max_violation <= 1e-10);
    }
}
