//! The flux map `a(y) = a0(|y|) y`, its primitive `G`, and a sampling audit
//! of the structural hypotheses on `a`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{gauss3, log_spaced, Pchip};
use crate::scalar::{c, Scalar};

/// `a0` given by samples, interpolated by a monotone cubic.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedA0<T> {
    interp: Pchip<T>,
    /// `G0` at the knots.
    cumulative: Vec<T>,
}

impl<T: Scalar> TabulatedA0<T> {
    pub fn new(t: Vec<T>, a0: Vec<T>) -> Result<Self> {
        if t.first().is_some_and(|&t0| t0 < T::zero()) {
            return Err(Error::InvalidParameter("tabulated a0 needs t >= 0".into()));
        }
        if a0.iter().any(|&v| !(v > T::zero())) {
            return Err(Error::InvalidParameter("tabulated a0 must be positive".into()));
        }
        let interp = Pchip::new(t, a0)?;
        let knots = interp.knots().to_vec();
        let mut cumulative = Vec::with_capacity(knots.len());
        let mut acc = interp.first() * knots[0] * knots[0] * c(0.5);
        cumulative.push(acc);
        for w in knots.windows(2) {
            acc += gauss3(|s| interp.eval(s) * s, w[0], w[1]);
            cumulative.push(acc);
        }
        Ok(Self { interp, cumulative })
    }

    fn a0(&self, t: T) -> T {
        self.interp.eval(t)
    }

    fn g0(&self, t: T) -> T {
        let k = self.interp.knots();
        let n = k.len();
        if t <= k[0] {
            return self.interp.first() * t * t * c(0.5);
        }
        if t >= k[n - 1] {
            return self.cumulative[n - 1] + self.interp.last() * (t * t - k[n - 1] * k[n - 1]) * c(0.5);
        }
        let j = k.partition_point(|&v| v <= t) - 1;
        self.cumulative[j] + gauss3(|s| self.interp.eval(s) * s, k[j], t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind<T> {
    /// `a(y) = |y|^{p-2} y`
    PLaplace,
    /// `a(y) = |y|^{p-2} y + |y|^{q-2} y`
    PQLaplace,
    /// `a(y) = (1 + |y|^2)^{(p-2)/2} y`
    PMeanCurvature,
    /// `a(y) = |y|^{p-2} y (1 + 1/(1 + |y|^p))`
    Perturbed,
    Tabulated(Arc<TabulatedA0<T>>),
}

/// Constants of the growth bound `c1 t^{p-1} <= theta(t) <= c2 (t^{tau-1} + t^{p-1})`
/// and `c_hat <= theta'(t) t / theta(t) <= c0`. Only `c1` enters the audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthWitness<T> {
    pub c_hat: T,
    pub c0: T,
    pub c1: T,
    pub c2: T,
    pub tau: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec<T> {
    pub kind: OperatorKind<T>,
    pub p: T,
    pub q_secondary: Option<T>,
    pub q_convexity: T,
    pub growth_witness: GrowthWitness<T>,
    pub regularization_eps: T,
}

impl<T: Scalar> OperatorSpec<T> {
    fn build(kind: OperatorKind<T>, p: T, q_secondary: Option<T>, q_convexity: T, w: GrowthWitness<T>) -> Result<Self> {
        if !(p > T::one() && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p = {p} must lie in (1, inf)")));
        }
        if let Some(q) = q_secondary {
            if !(q > T::one() && q < p) {
                return Err(Error::InvalidParameter(format!("q = {q} must lie in (1, p)")));
            }
        }
        let spec = Self { kind, p, q_secondary, q_convexity, growth_witness: w, regularization_eps: c(1e-12) };
        spec.with_q_convexity(q_convexity)
    }

    pub fn p_laplace(p: T) -> Result<Self> {
        let w = GrowthWitness { c_hat: p - T::one(), c0: p - T::one(), c1: p - T::one(), c2: p - T::one(), tau: T::one() };
        Self::build(OperatorKind::PLaplace, p, None, p, w)
    }

    /// The convexity exponent defaults to `q`, the smaller of the two.
    pub fn pq_laplace(p: T, q: T) -> Result<Self> {
        let w = GrowthWitness { c_hat: q - T::one(), c0: p - T::one(), c1: p - T::one(), c2: p - T::one(), tau: q };
        Self::build(OperatorKind::PQLaplace, p, Some(q), q, w)
    }

    pub fn mean_curvature(p: T) -> Result<Self> {
        let lo = (p - T::one()).min(T::one());
        let w = GrowthWitness { c_hat: lo, c0: (p - T::one()).max(T::one()), c1: p - T::one(), c2: p.max(c(2.0)), tau: c(2.0f64.min(p.as_f64())) };
        Self::build(OperatorKind::PMeanCurvature, p, None, p, w)
    }

    pub fn perturbed(p: T) -> Result<Self> {
        let w = GrowthWitness { c_hat: p - T::one(), c0: c::<T>(2.0) * p, c1: p - T::one(), c2: c::<T>(2.0) * p, tau: T::one() };
        Self::build(OperatorKind::Perturbed, p, None, p, w)
    }

    pub fn tabulated(p: T, t: Vec<T>, a0: Vec<T>) -> Result<Self> {
        let w = GrowthWitness { c_hat: p - T::one(), c0: p - T::one(), c1: p - T::one(), c2: p - T::one(), tau: T::one() };
        Self::build(OperatorKind::Tabulated(Arc::new(TabulatedA0::new(t, a0)?)), p, None, p, w)
    }

    pub fn with_q_convexity(mut self, q: T) -> Result<Self> {
        if !(q > T::one() && q <= self.p) {
            return Err(Error::InvalidParameter(format!("q_convexity = {q} must lie in (1, p]")));
        }
        self.q_convexity = q;
        Ok(self)
    }

    pub fn with_growth_witness(mut self, w: GrowthWitness<T>) -> Self {
        self.growth_witness = w;
        self
    }

    pub fn is_p_laplace(&self) -> bool {
        matches!(self.kind, OperatorKind::PLaplace)
    }

    /// `a0(t) t` for `t >= 0`; no division involved for the closed forms.
    pub fn flux(&self, t: T) -> T {
        let p = self.p;
        let one = T::one();
        if t == T::zero() {
            return T::zero();
        }
        match &self.kind {
            OperatorKind::PLaplace => t.powf(p - one),
            OperatorKind::PQLaplace => t.powf(p - one) + t.powf(self.q_secondary.unwrap() - one),
            OperatorKind::PMeanCurvature => (one + t * t).powf((p - c(2.0)) * c(0.5)) * t,
            OperatorKind::Perturbed => t.powf(p - one) * (one + one / (one + t.powf(p))),
            OperatorKind::Tabulated(tab) => tab.a0(t) * t,
        }
    }

    /// `a0(t)`, with `t` clamped to `regularization_eps` where a division is needed.
    pub fn eval_a0(&self, t: T) -> T {
        match &self.kind {
            OperatorKind::Tabulated(tab) => tab.a0(t),
            OperatorKind::PMeanCurvature => (T::one() + t * t).powf((self.p - c(2.0)) * c(0.5)),
            _ => {
                let t = t.abs().max(self.regularization_eps);
                self.flux(t) / t
            }
        }
    }

    /// `a(y) = a0(|y|) y`.
    pub fn eval_a(&self, y: T) -> T {
        self.flux(y.abs()) * y.signum()
    }

    /// `G0(t) = int_0^t a0(s) s ds`.
    pub fn eval_g0(&self, t: T) -> T {
        let p = self.p;
        let t = t.abs();
        if t == T::zero() {
            return T::zero();
        }
        match &self.kind {
            OperatorKind::PLaplace => t.powf(p) / p,
            OperatorKind::PQLaplace => {
                let q = self.q_secondary.unwrap();
                t.powf(p) / p + t.powf(q) / q
            }
            OperatorKind::PMeanCurvature => ((p * c(0.5)) * (t * t).ln_1p()).exp_m1() / p,
            OperatorKind::Perturbed => {
                let tp = t.powf(p);
                (tp + tp.ln_1p()) / p
            }
            OperatorKind::Tabulated(tab) => tab.g0(t),
        }
    }

    /// `G(y) = G0(|y|)`.
    pub fn eval_g(&self, y: T) -> T {
        self.eval_g0(y.abs())
    }
}

/// Sample points for the hypothesis audit.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisGrid<T>(Vec<T>);

impl<T: Scalar> HypothesisGrid<T> {
    pub fn new(points: Vec<T>) -> Result<Self> {
        if points.len() < 16 {
            return Err(Error::Grid(format!("{} points, need at least 16", points.len())));
        }
        if points.iter().any(|t| !(t.is_finite() && *t > T::zero())) {
            return Err(Error::Grid("points must be finite and positive".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("points must be strictly increasing".into()));
        }
        Ok(Self(points))
    }

    pub fn points(&self) -> &[T] {
        &self.0
    }
}

impl<T: Scalar> Default for HypothesisGrid<T> {
    /// 64 log-spaced points in `[1e-6, 1e3]`.
    fn default() -> Self {
        Self(log_spaced(c(1e-6), c(1e3), 64))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck<T> {
    pub name: &'static str,
    pub passed: bool,
    /// Largest relative violation seen on the grid (0 when none).
    pub max_violation: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport<T> {
    pub checks: Vec<HypothesisCheck<T>>,
    /// Fitted constant of the upper bound `G(y) <= c5 (1 + |y|^p)`.
    pub c5: T,
    /// Largest `|p G0(t) - a0(t) t^2|` relative to `p G0(t)`; zero for the pure p-Laplacian.
    pub max_abs_pg_gap: T,
    pub all_passed: bool,
}

impl<T: Scalar> HypothesisReport<T> {
    pub fn check(&self, name: &str) -> Option<&HypothesisCheck<T>> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Audits the operator hypotheses on `grid`:
/// strict monotonicity of `t a0(t)`, `p G0 - a0 t^2 >= 0`, midpoint convexity of
/// `s -> G0(s^{1/q})`, the sandwich `c1/(p(p-1)) t^p <= G0(t) <= c5 (1 + t^p)`,
/// and `a0(t) t^2 >= c1/(p-1) t^p`.
pub fn check_hypotheses<T: Scalar>(spec: &OperatorSpec<T>, grid: &HypothesisGrid<T>) -> Result<HypothesisReport<T>> {
    let t = grid.points();
    let p = spec.p;
    let q = spec.q_convexity;
    let c1 = spec.growth_witness.c1;
    let tol = T::epsilon() * c(1e3);
    let tiny = T::min_positive_value().sqrt();
    let rel = |excess: T, scale: T| (excess / scale.abs().max(tiny)).max(T::zero());

    let flux: Vec<T> = t.iter().map(|&s| spec.flux(s)).collect();
    let g0: Vec<T> = t.iter().map(|&s| spec.eval_g0(s)).collect();

    let mut monotone = T::zero();
    let mut monotone_ok = true;
    for w in flux.windows(2) {
        if !(w[1] > w[0]) {
            monotone_ok = false;
        }
        monotone = monotone.max(rel(w[0] - w[1], w[0]));
    }

    let mut pg = T::zero();
    let mut pg_gap = T::zero();
    for i in 0..t.len() {
        let d = p * g0[i] - flux[i] * t[i];
        pg = pg.max(rel(-d, p * g0[i]));
        pg_gap = pg_gap.max((d / (p * g0[i]).max(tiny)).abs());
    }

    let phi = |s: T| spec.eval_g0(s.powf(T::one() / q));
    let s: Vec<T> = t.iter().map(|&v| v.powf(q)).collect();
    let mut convex = T::zero();
    for stride in [1usize, 2, 4, 8, 16] {
        for i in 0..s.len().saturating_sub(stride) {
            let (a, b) = (s[i], s[i + stride]);
            let chord = (phi(a) + phi(b)) * c(0.5);
            convex = convex.max(rel(phi((a + b) * c(0.5)) - chord, chord));
        }
    }

    let lower = c1 / (p * (p - T::one()));
    let mut sandwich = T::zero();
    let mut c5 = T::zero();
    for i in 0..t.len() {
        let tp = t[i].powf(p);
        sandwich = sandwich.max(rel(lower * tp - g0[i], lower * tp));
        c5 = c5.max(g0[i] / (T::one() + tp));
    }

    let coerc = c1 / (p - T::one());
    let mut low_gap = T::zero();
    for i in 0..t.len() {
        let tp = t[i].powf(p);
        low_gap = low_gap.max(rel(coerc * tp - flux[i] * t[i], coerc * tp));
    }

    let checks = vec![
        HypothesisCheck { name: "flux_strictly_increasing", passed: monotone_ok, max_violation: monotone },
        HypothesisCheck { name: "pG0_minus_a0t2_nonnegative", passed: pg <= tol, max_violation: pg },
        HypothesisCheck { name: "G0_convex_in_t_pow_q", passed: convex <= tol, max_violation: convex },
        HypothesisCheck { name: "G_sandwich", passed: sandwich <= tol, max_violation: sandwich },
        HypothesisCheck { name: "a_dot_y_lower_bound", passed: low_gap <= tol, max_violation: low_gap },
    ];
    let all_passed = checks.iter().all(|c| c.passed);
    Ok(HypothesisReport { checks, c5, max_abs_pg_gap: pg_gap, all_passed })
}
