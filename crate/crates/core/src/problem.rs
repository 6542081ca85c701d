//! Problem data: interval, potential `xi`, Robin coefficients, the reaction
//! `f` with its primitive, and the truncated reactions built from them.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{DiscreteFunction, Mesh};
use crate::numerics::adaptive_simpson;
use crate::scalar::{c, pos_pow, Scalar};

/// The potential, constant or sampled at equally spaced points of the interval
/// (linear interpolation in between).
#[derive(Debug, Clone, PartialEq)]
pub enum XiSpec<T> {
    Const(T),
    Nodes(Vec<T>),
}

/// User reaction `f(z, x)`, evaluated only for `x > 0`.
pub type CustomFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum PerturbationKind<T> {
    /// `x^{tau-1} - 2 x^{q-1}` on `[0, 1]`, `x^{r-1} - 2 x^{s-1}` beyond.
    SublinearExample { tau: T, q: T, r: T, s: T },
    /// `x^{tau-1} - 2 x^{theta-1}` on `[0, 1]`, `x^{r-1} - 2 x^{p-1}` beyond.
    SuperlinearAR { tau: T, theta: T, r: T },
    /// `x^{tau-1} - 2 x^{theta-1}` on `[0, 1]`, `x^{p-1} (ln x - 1)` beyond.
    SuperlinearNonAR { tau: T, theta: T },
    /// `sum_k c_k x^{e_k - 1}` for terms `(c_k, e_k)`, `e_k > 1`.
    PowerSum { terms: Vec<(T, T)> },
    Custom { f: CustomFn<T> },
}

impl<T: fmt::Debug> fmt::Debug for PerturbationKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SublinearExample { tau, q, r, s } => {
                write!(f, "SublinearExample {{ tau: {tau:?}, q: {q:?}, r: {r:?}, s: {s:?} }}")
            }
            Self::SuperlinearAR { tau, theta, r } => {
                write!(f, "SuperlinearAR {{ tau: {tau:?}, theta: {theta:?}, r: {r:?} }}")
            }
            Self::SuperlinearNonAR { tau, theta } => {
                write!(f, "SuperlinearNonAR {{ tau: {tau:?}, theta: {theta:?} }}")
            }
            Self::PowerSum { terms } => write!(f, "PowerSum {{ terms: {terms:?} }}"),
            Self::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// Which hypothesis classes the reaction belongs to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassFlags {
    /// Sublinear at infinity, `(p-1)`-superlinear near zero.
    pub sublinear_h1: bool,
    pub strictly_positive: bool,
    /// `(p-1)`-superlinear at infinity with a concave term near zero.
    pub superlinear_h2: bool,
    /// Strictly positive with `f(x)/x^{p-1}` strictly decreasing.
    pub unique_h1pp: bool,
    pub ambrosetti_rabinowitz: bool,
}

#[derive(Debug, Clone)]
pub struct PerturbationSpec<T> {
    pub kind: PerturbationKind<T>,
    pub class_flags: ClassFlags,
    p: T,
}

fn check_exponents<T: Scalar>(names: &[(&str, T)]) -> Result<()> {
    for (name, e) in names {
        if !(*e > T::one() && e.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponent {name} = {e} must exceed 1")));
        }
    }
    Ok(())
}

impl<T: Scalar> PerturbationSpec<T> {
    pub fn sublinear_example(p: T, tau: T, q: T, r: T, s: T) -> Result<Self> {
        check_exponents(&[("tau", tau), ("q", q), ("r", r), ("s", s)])?;
        let flags = ClassFlags {
            sublinear_h1: tau < q && q <= p && s < r && r < p,
            ..ClassFlags::default()
        };
        Self::checked(PerturbationKind::SublinearExample { tau, q, r, s }, flags, p)
    }

    pub fn superlinear_ar(p: T, tau: T, theta: T, r: T) -> Result<Self> {
        check_exponents(&[("tau", tau), ("theta", theta), ("r", r)])?;
        let flags = ClassFlags {
            superlinear_h2: tau < theta && theta < p && p < r,
            ambrosetti_rabinowitz: p < r,
            ..ClassFlags::default()
        };
        Self::checked(PerturbationKind::SuperlinearAR { tau, theta, r }, flags, p)
    }

    pub fn superlinear_non_ar(p: T, tau: T, theta: T) -> Result<Self> {
        check_exponents(&[("tau", tau), ("theta", theta)])?;
        let flags = ClassFlags { superlinear_h2: tau < theta && theta < p, ..ClassFlags::default() };
        Self::checked(PerturbationKind::SuperlinearNonAR { tau, theta }, flags, p)
    }

    pub fn power_sum(p: T, terms: Vec<(T, T)>) -> Result<Self> {
        for &(coef, e) in &terms {
            check_exponents(&[("e", e)])?;
            if !coef.is_finite() {
                return Err(Error::InvalidParameter("non-finite power-sum coefficient".into()));
            }
        }
        let active: Vec<(T, T)> = terms.iter().copied().filter(|t| t.0 != T::zero()).collect();
        let lowest = active.iter().copied().reduce(|a, b| if b.1 < a.1 { b } else { a });
        let highest = active.iter().copied().reduce(|a, b| if b.1 > a.1 { b } else { a });
        let positive = !active.is_empty() && active.iter().all(|t| t.0 > T::zero());
        let all_below = active.iter().all(|t| t.1 < p);
        let low_pos = lowest.is_some_and(|t| t.0 > T::zero() && t.1 < p);
        let flags = ClassFlags {
            sublinear_h1: low_pos && all_below,
            strictly_positive: positive,
            superlinear_h2: low_pos && highest.is_some_and(|t| t.0 > T::zero() && t.1 > p),
            unique_h1pp: positive && all_below,
            ambrosetti_rabinowitz: highest.is_some_and(|t| t.0 > T::zero() && t.1 > p),
        };
        Self::checked(PerturbationKind::PowerSum { terms }, flags, p)
    }

    pub fn custom(p: T, f: CustomFn<T>, flags: ClassFlags) -> Result<Self> {
        Self::checked(PerturbationKind::Custom { f }, flags, p)
    }

    /// The zero reaction.
    pub fn zero(p: T) -> Result<Self> {
        Self::power_sum(p, Vec::new())
    }

    fn checked(kind: PerturbationKind<T>, class_flags: ClassFlags, p: T) -> Result<Self> {
        if !(p > T::one()) {
            return Err(Error::InvalidParameter(format!("p = {p} must exceed 1")));
        }
        let spec = Self { kind, class_flags, p };
        if let Some((left, right)) = spec.branch_values_at_one() {
            if (left - right).abs() > c(1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "piecewise reaction is discontinuous at x = 1 ({left} vs {right})"
                )));
            }
        }
        Ok(spec)
    }

    pub fn p(&self) -> T {
        self.p
    }

    /// Both branch formulas of the piecewise kinds evaluated at the breakpoint.
    fn branch_values_at_one(&self) -> Option<(T, T)> {
        let two = c::<T>(2.0);
        let one = T::one();
        match self.kind {
            PerturbationKind::SublinearExample { .. }
            | PerturbationKind::SuperlinearAR { .. }
            | PerturbationKind::SuperlinearNonAR { .. } => {
                let right = match self.kind {
                    PerturbationKind::SuperlinearNonAR { .. } => -one,
                    _ => one - two,
                };
                Some((one - two, right))
            }
            _ => None,
        }
    }

    pub fn f(&self, z: T, x: T) -> T {
        if !(x > T::zero()) {
            return T::zero();
        }
        let one = T::one();
        let two = c::<T>(2.0);
        let p = self.p;
        match &self.kind {
            PerturbationKind::SublinearExample { tau, q, r, s } => {
                if x <= one {
                    x.powf(*tau - one) - two * x.powf(*q - one)
                } else {
                    x.powf(*r - one) - two * x.powf(*s - one)
                }
            }
            PerturbationKind::SuperlinearAR { tau, theta, r } => {
                if x <= one {
                    x.powf(*tau - one) - two * x.powf(*theta - one)
                } else {
                    x.powf(*r - one) - two * x.powf(p - one)
                }
            }
            PerturbationKind::SuperlinearNonAR { tau, theta } => {
                if x <= one {
                    x.powf(*tau - one) - two * x.powf(*theta - one)
                } else {
                    x.powf(p - one) * (x.ln() - one)
                }
            }
            PerturbationKind::PowerSum { terms } => terms.iter().map(|&(k, e)| k * x.powf(e - one)).sum(),
            PerturbationKind::Custom { f } => f(z, x),
        }
    }

    pub fn primitive(&self, z: T, x: T) -> Result<T> {
        if !(x > T::zero()) {
            return Ok(T::zero());
        }
        let one = T::one();
        let two = c::<T>(2.0);
        let p = self.p;
        let lower = |tau: T, q: T, x: T| x.powf(tau) / tau - two * x.powf(q) / q;
        Ok(match &self.kind {
            PerturbationKind::SublinearExample { tau, q, r, s } => {
                if x <= one {
                    lower(*tau, *q, x)
                } else {
                    lower(*tau, *q, one) + (x.powf(*r) - one) / *r - two * (x.powf(*s) - one) / *s
                }
            }
            PerturbationKind::SuperlinearAR { tau, theta, r } => {
                if x <= one {
                    lower(*tau, *theta, x)
                } else {
                    lower(*tau, *theta, one) + (x.powf(*r) - one) / *r - two * (x.powf(p) - one) / p
                }
            }
            PerturbationKind::SuperlinearNonAR { tau, theta } => {
                if x <= one {
                    lower(*tau, *theta, x)
                } else {
                    let xp = x.powf(p);
                    lower(*tau, *theta, one) + (xp * (x.ln() - one) + one) / p - (xp - one) / (p * p)
                }
            }
            PerturbationKind::PowerSum { terms } => terms.iter().map(|&(k, e)| k * x.powf(e) / e).sum(),
            PerturbationKind::Custom { f } => adaptive_simpson(&|s| if s > T::zero() { f(z, s) } else { T::zero() }, T::zero(), x, c(1e-10))?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec<T> {
    pub interval: (T, T),
    pub xi: XiSpec<T>,
    pub beta: (T, T),
    pub perturbation: PerturbationSpec<T>,
    pub p: T,
    xi_inf_norm: T,
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn new(interval: (T, T), xi: XiSpec<T>, beta: (T, T), perturbation: PerturbationSpec<T>, p: T) -> Result<Self> {
        if !(interval.0.is_finite() && interval.1.is_finite() && interval.0 < interval.1) {
            return Err(Error::InvalidParameter(format!("empty interval ({}, {})", interval.0, interval.1)));
        }
        if !(beta.0 >= T::zero() && beta.1 >= T::zero() && beta.0.is_finite() && beta.1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta = ({}, {}) must be nonnegative",
                beta.0, beta.1
            )));
        }
        if perturbation.p() != p {
            return Err(Error::InvalidParameter("reaction and problem disagree on p".into()));
        }
        let xi_inf_norm = match &xi {
            XiSpec::Const(v) => v.abs(),
            XiSpec::Nodes(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidParameter("empty xi sample list".into()));
                }
                v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
            }
        };
        if !xi_inf_norm.is_finite() {
            return Err(Error::InvalidParameter("xi must be bounded".into()));
        }
        Ok(Self { interval, xi, beta, perturbation, p, xi_inf_norm })
    }

    pub fn xi_inf_norm(&self) -> T {
        self.xi_inf_norm
    }

    /// Default shift `||xi||_inf + 1`.
    pub fn default_eta(&self) -> T {
        self.xi_inf_norm + T::one()
    }

    pub fn flags(&self) -> ClassFlags {
        self.perturbation.class_flags
    }

    pub fn xi_at(&self, z: T) -> T {
        match &self.xi {
            XiSpec::Const(v) => *v,
            XiSpec::Nodes(v) if v.len() == 1 => v[0],
            XiSpec::Nodes(v) => {
                let (a, b) = self.interval;
                let s = ((z - a) / (b - a)).max(T::zero()).min(T::one()) * T::from_usize(v.len() - 1).unwrap();
                let k = s.floor().to_usize().unwrap().min(v.len() - 2);
                let w = s - T::from_usize(k).unwrap();
                v[k] * (T::one() - w) + v[k + 1] * w
            }
        }
    }

    pub fn xi_nodes(&self, mesh: &Mesh<T>) -> Vec<T> {
        (0..mesh.n_nodes()).map(|i| self.xi_at(mesh.node(i))).collect()
    }

    /// Potential with constant value (for the shifted eigenvalue checks).
    pub fn with_xi(&self, xi: XiSpec<T>) -> Result<Self> {
        Self::new(self.interval, xi, self.beta, self.perturbation.clone(), self.p)
    }

    pub fn with_beta(&self, beta: (T, T)) -> Result<Self> {
        Self::new(self.interval, self.xi.clone(), beta, self.perturbation.clone(), self.p)
    }

    pub fn with_perturbation(&self, perturbation: PerturbationSpec<T>) -> Result<Self> {
        Self::new(self.interval, self.xi.clone(), self.beta, perturbation, self.p)
    }
}

/// `f(z, x)`, zero for `x <= 0`.
pub fn eval_f<T: Scalar>(prob: &ProblemSpec<T>, z: T, x: T) -> T {
    prob.perturbation.f(z, x)
}

/// `F(z, x) = int_0^x f(z, s) ds`.
#[allow(non_snake_case)]
pub fn eval_F<T: Scalar>(prob: &ProblemSpec<T>, z: T, x: T) -> Result<T> {
    prob.perturbation.primitive(z, x)
}

/// `d(z, x) = f(z, x) x - p F(z, x)`.
pub fn eval_d<T: Scalar>(prob: &ProblemSpec<T>, z: T, x: T) -> Result<T> {
    Ok(eval_f(prob, z, x) * x - prob.p * eval_F(prob, z, x)?)
}

/// Coefficients of the auxiliary reaction `c9 x^{q-1} - c10 x^{r-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxCoeffs<T> {
    pub c9: T,
    pub c10: T,
    pub q_exp: T,
    pub r_exp: T,
}

impl<T: Scalar> AuxCoeffs<T> {
    pub fn reaction(&self, x: T) -> T {
        self.c9 * pos_pow(x, self.q_exp - T::one()) - self.c10 * pos_pow(x, self.r_exp - T::one())
    }

    pub fn primitive(&self, x: T) -> T {
        self.c9 * pos_pow(x, self.q_exp) / self.q_exp - self.c10 * pos_pow(x, self.r_exp) / self.r_exp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationMode {
    /// `0` for `x <= 0`, `(lambda + eta) x^{p-1} + f(z, x)` otherwise.
    PlainShifted,
    /// Frozen at the barrier value for `x` above the barrier.
    CapAbove,
    /// Frozen at the barrier value for `x` below the barrier.
    FloorBelow,
}

#[derive(Debug, Clone)]
pub struct TruncatedReaction<T> {
    pub mode: TruncationMode,
    pub lambda: T,
    pub eta: T,
    pub barrier: Option<DiscreteFunction<T>>,
    /// When set, the base reaction is the auxiliary one instead of `lambda x^{p-1} + f`.
    pub aux: Option<AuxCoeffs<T>>,
}

impl<T: Scalar> TruncatedReaction<T> {
    pub fn new(
        mode: TruncationMode,
        lambda: T,
        eta: T,
        barrier: Option<DiscreteFunction<T>>,
        prob: &ProblemSpec<T>,
    ) -> Result<Self> {
        if !(eta > prob.xi_inf_norm()) {
            return Err(Error::InvalidParameter(format!(
                "eta = {eta} must exceed ||xi||_inf = {}",
                prob.xi_inf_norm()
            )));
        }
        if mode != TruncationMode::PlainShifted {
            let b = barrier.as_ref().ok_or(Error::BarrierMissing)?;
            if !(b.min() > T::zero()) {
                return Err(Error::InvalidParameter("barrier must be strictly positive at every node".into()));
            }
        }
        Ok(Self { mode, lambda, eta, barrier, aux: None })
    }

    pub fn with_aux(mut self, aux: AuxCoeffs<T>) -> Self {
        self.aux = Some(aux);
        self
    }

    fn barrier_at(&self, node: usize) -> Result<T> {
        let b = self.barrier.as_ref().ok_or(Error::BarrierMissing)?;
        b.values().get(node).copied().ok_or(Error::MeshMismatch)
    }

    fn base(&self, prob: &ProblemSpec<T>, z: T, x: T) -> T {
        if !(x > T::zero()) {
            return T::zero();
        }
        match &self.aux {
            Some(a) => a.reaction(x),
            None => self.lambda * x.powf(prob.p - T::one()) + eval_f(prob, z, x),
        }
    }

    fn base_primitive(&self, prob: &ProblemSpec<T>, z: T, x: T) -> Result<T> {
        if !(x > T::zero()) {
            return Ok(T::zero());
        }
        match &self.aux {
            Some(a) => Ok(a.primitive(x)),
            None => Ok(self.lambda * x.powf(prob.p) / prob.p + eval_F(prob, z, x)?),
        }
    }

    fn shifted(&self, prob: &ProblemSpec<T>, z: T, x: T) -> T {
        self.eta * pos_pow(x, prob.p - T::one()) + self.base(prob, z, x)
    }

    fn shifted_primitive(&self, prob: &ProblemSpec<T>, z: T, x: T) -> Result<T> {
        Ok(self.eta * pos_pow(x, prob.p) / prob.p + self.base_primitive(prob, z, x)?)
    }

    /// The truncated reaction at node `node` (coordinate `z`).
    pub fn value(&self, prob: &ProblemSpec<T>, z: T, node: usize, x: T) -> Result<T> {
        Ok(match self.mode {
            TruncationMode::PlainShifted => self.shifted(prob, z, x),
            TruncationMode::CapAbove => {
                let b = self.barrier_at(node)?;
                self.shifted(prob, z, x.min(b))
            }
            TruncationMode::FloorBelow => {
                let b = self.barrier_at(node)?;
                self.shifted(prob, z, x.max(b))
            }
        })
    }

    /// `int_0^x` of [`Self::value`].
    pub fn primitive(&self, prob: &ProblemSpec<T>, z: T, node: usize, x: T) -> Result<T> {
        match self.mode {
            TruncationMode::PlainShifted => self.shifted_primitive(prob, z, x),
            TruncationMode::CapAbove => {
                let b = self.barrier_at(node)?;
                if x <= b {
                    self.shifted_primitive(prob, z, x)
                } else {
                    Ok(self.shifted_primitive(prob, z, b)? + self.shifted(prob, z, b) * (x - b))
                }
            }
            TruncationMode::FloorBelow => {
                let b = self.barrier_at(node)?;
                let kb = self.shifted(prob, z, b);
                if x <= b {
                    Ok(kb * x)
                } else {
                    Ok(kb * b + self.shifted_primitive(prob, z, x)? - self.shifted_primitive(prob, z, b)?)
                }
            }
        }
    }
}

/// Free-function form of [`TruncatedReaction::value`].
pub fn eval_truncated<T: Scalar>(tr: &TruncatedReaction<T>, prob: &ProblemSpec<T>, z: T, node: usize, x: T) -> Result<T> {
    tr.value(prob, z, node, x)
}

/// Smallest shift `s` (searched over `0` and powers of two up to `1e6`) such that
/// `x -> f(z, x) + s x^{p-1}` is nondecreasing on a 2001-point grid of `[0, rho]`,
/// for `z` sampled across the interval.
pub fn estimate_xi_hat<T: Scalar>(prob: &ProblemSpec<T>, rho: T) -> Result<T> {
    if !(rho > T::zero() && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho = {rho} must be positive")));
    }
    let n = 2001;
    let xs: Vec<T> = (0..n).map(|j| rho * T::from_usize(j).unwrap() / T::from_usize(n - 1).unwrap()).collect();
    let (a, b) = prob.interval;
    let zs: Vec<T> = match prob.perturbation.kind {
        PerturbationKind::Custom { .. } => (0..9).map(|k| a + (b - a) * T::from_usize(k).unwrap() / c(8.0)).collect(),
        _ => vec![a],
    };
    let pm1 = prob.p - T::one();
    let samples: Vec<Vec<(T, T)>> = zs
        .iter()
        .map(|&z| xs.iter().map(|&x| (eval_f(prob, z, x), pos_pow(x, pm1))).collect())
        .collect();
    let tol = T::epsilon() * c(64.0);
    let works = |s: T| {
        samples.iter().all(|row| {
            row.windows(2).all(|w| {
                let g0 = w[0].0 + s * w[0].1;
                let g1 = w[1].0 + s * w[1].1;
                g1 >= g0 - tol * (T::one() + g0.abs() + g1.abs())
            })
        })
    };
    if works(T::zero()) {
        return Ok(T::zero());
    }
    let cap = c::<T>(1e6);
    let mut s = c::<T>(2.0f64.powi(-20));
    while s <= cap {
        if works(s) {
            return Ok(s);
        }
        s = s * c(2.0);
    }
    if works(cap) {
        return Ok(cap);
    }
    Err(Error::XiHatNotFound { rho: rho.as_f64() })
}

/// Builds a barrier on the problem's mesh from nodal values.
pub fn barrier_from<T: Scalar>(mesh: Arc<Mesh<T>>, values: Vec<T>) -> Result<DiscreteFunction<T>> {
    DiscreteFunction::new(mesh, values)
}
