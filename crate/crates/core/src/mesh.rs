//! Uniform P1 mesh on an interval, nodal functions, quadrature and norms.
//!
//! Zero-order integrals use the trapezoid rule on nodal values; gradient
//! integrals are exact per cell because `Du` is constant on each cell.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{abs_pow, c, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    a: T,
    b: T,
    n_cells: usize,
    h: T,
}

impl<T: Scalar> Mesh<T> {
    pub fn new(a: T, b: T, n_cells: usize) -> Result<Self> {
        if n_cells < 4 {
            return Err(Error::InvalidParameter(format!("n_cells = {n_cells} < 4")));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParameter(format!("interval ({a}, {b}) is empty")));
        }
        let h = (b - a) / T::from_usize(n_cells).unwrap();
        Ok(Self { a, b, n_cells, h })
    }

    pub fn shared(a: T, b: T, n_cells: usize) -> Result<Arc<Self>> {
        Self::new(a, b, n_cells).map(Arc::new)
    }

    pub fn interval(&self) -> (T, T) {
        (self.a, self.b)
    }

    pub fn length(&self) -> T {
        self.b - self.a
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn node(&self, i: usize) -> T {
        if i == self.n_cells {
            self.b
        } else {
            self.a + self.h * T::from_usize(i).unwrap()
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n_nodes()).map(|i| self.node(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> T {
        if i == 0 || i == self.n_cells {
            self.h * c(0.5)
        } else {
            self.h
        }
    }
}

/// Nodal values of a continuous piecewise-linear function.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction<T> {
    mesh: Arc<Mesh<T>>,
    values: Vec<T>,
}

impl<T: Scalar> DiscreteFunction<T> {
    pub fn new(mesh: Arc<Mesh<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != mesh.n_nodes() {
            return Err(Error::InvalidParameter(format!(
                "{} values for {} nodes",
                values.len(),
                mesh.n_nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite nodal value".into()));
        }
        Ok(Self { mesh, values })
    }

    pub fn from_fn(mesh: Arc<Mesh<T>>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = mesh.nodes().into_iter().map(f).collect();
        Self::new(mesh, values)
    }

    pub fn constant(mesh: Arc<Mesh<T>>, value: T) -> Self {
        let n = mesh.n_nodes();
        Self { mesh, values: vec![value; n] }
    }

    /// Replaces the values, keeping the mesh. Used by solvers on vectors they produced.
    pub(crate) fn with_values(&self, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self { mesh: self.mesh.clone(), values }
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn same_mesh(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh
    }

    /// Cell slopes `Du`, one per cell.
    pub fn slopes(&self) -> Vec<T> {
        let h = self.mesh.h();
        self.values.windows(2).map(|w| (w[1] - w[0]) / h).collect()
    }

    /// Nodal derivative: average of the adjacent cell slopes (one-sided at the ends).
    pub fn nodal_derivative(&self) -> Vec<T> {
        let s = self.slopes();
        let n = self.values.len();
        (0..n)
            .map(|i| {
                if i == 0 {
                    s[0]
                } else if i == n - 1 {
                    s[n - 2]
                } else {
                    (s[i - 1] + s[i]) * c(0.5)
                }
            })
            .collect()
    }

    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(T::zero()))
    }

    pub fn negative_part(&self) -> Self {
        self.map(|v| (-v).max(T::zero()))
    }

    pub fn abs(&self) -> Self {
        self.map(|v| v.abs())
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { mesh: self.mesh.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    /// `u - v` nodally.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !self.same_mesh(other) {
            return Err(Error::MeshMismatch);
        }
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect()))
    }
}

/// `||u||_p^p` by the trapezoid rule.
pub fn lp_norm_pow<T: Scalar>(u: &DiscreteFunction<T>, p: T) -> T {
    let m = u.mesh();
    u.values().iter().enumerate().map(|(i, &v)| m.weight(i) * abs_pow(v, p)).sum()
}

pub fn lp_norm<T: Scalar>(u: &DiscreteFunction<T>, p: T) -> T {
    lp_norm_pow(u, p).powf(T::one() / p)
}

/// `||Du||_p^p`, exact for piecewise-constant slopes.
pub fn slope_norm_pow<T: Scalar>(u: &DiscreteFunction<T>, p: T) -> T {
    let h = u.mesh().h();
    u.slopes().into_iter().map(|s| h * abs_pow(s, p)).sum()
}

/// `(||u||_p^p + ||Du||_p^p)^{1/p}`.
pub fn norm_w1p<T: Scalar>(u: &DiscreteFunction<T>, p: T) -> T {
    (lp_norm_pow(u, p) + slope_norm_pow(u, p)).powf(T::one() / p)
}

/// `beta_L |u(a)|^p + beta_R |u(b)|^p`.
pub fn boundary_term<T: Scalar>(u: &DiscreteFunction<T>, beta: (T, T), p: T) -> T {
    let v = u.values();
    beta.0 * abs_pow(v[0], p) + beta.1 * abs_pow(v[v.len() - 1], p)
}

/// `max |u - v| + max |Du - Dv|`, the discrete C^1 distance.
pub fn c1_distance<T: Scalar>(u: &DiscreteFunction<T>, v: &DiscreteFunction<T>) -> Result<T> {
    if !u.same_mesh(v) {
        return Err(Error::MeshMismatch);
    }
    let d0 = u.values().iter().zip(v.values()).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
    let d1 = u
        .slopes()
        .into_iter()
        .zip(v.slopes())
        .fold(T::zero(), |m, (a, b)| m.max((a - b).abs()));
    Ok(d0 + d1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeStatus {
    /// Strictly positive at every node, boundary included.
    InDPlus,
    /// Nonnegative up to the tolerance but touching zero somewhere.
    InCPlusOnly,
    Outside,
}

pub fn cone_check<T: Scalar>(u: &DiscreteFunction<T>, strict_tol: T) -> ConeStatus {
    let m = u.min();
    if m > strict_tol {
        ConeStatus::InDPlus
    } else if m >= -strict_tol {
        ConeStatus::InCPlusOnly
    } else {
        ConeStatus::Outside
    }
}

/// Serializes as CSV with columns `z,u` (and `du` when requested). Each
/// entry of `header` becomes a leading `# ` comment line.
pub fn to_csv<T: Scalar>(u: &DiscreteFunction<T>, header: &[String], with_derivative: bool) -> String {
    let mut out = String::new();
    for line in header {
        let _ = writeln!(out, "# {line}");
    }
    let z = u.mesh().nodes();
    if with_derivative {
        let du = u.nodal_derivative();
        out.push_str("z,u,du\n");
        for i in 0..z.len() {
            let _ = writeln!(out, "{},{},{}", fmt_num(z[i]), fmt_num(u.values()[i]), fmt_num(du[i]));
        }
    } else {
        out.push_str("z,u\n");
        for (zi, ui) in z.iter().zip(u.values()) {
            let _ = writeln!(out, "{},{}", fmt_num(*zi), fmt_num(*ui));
        }
    }
    out
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e15)`.
pub fn fmt_num<T: Scalar>(x: T) -> String {
    let v = x.as_f64();
    if v != 0.0 && v.is_finite() && !(1e-4..1e15).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Parses the output of [`to_csv`]. Nodes must form a uniform mesh.
pub fn from_csv<T: Scalar>(text: &str) -> Result<DiscreteFunction<T>> {
    let mut z = Vec::new();
    let mut u = Vec::new();
    let mut seen_header = false;
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            seen_header = true;
            if line.starts_with('z') {
                continue;
            }
        }
        let mut cols = line.split(',');
        let parse = |s: Option<&str>| -> Result<T> {
            s.and_then(|s| s.trim().parse::<f64>().ok())
                .map(T::lit)
                .ok_or_else(|| Error::InvalidParameter(format!("bad CSV row `{line}`")))
        };
        z.push(parse(cols.next())?);
        u.push(parse(cols.next())?);
    }
    if z.len() < 5 {
        return Err(Error::InvalidParameter("profile needs at least 5 nodes".into()));
    }
    let mesh = Mesh::shared(z[0], z[z.len() - 1], z.len() - 1)?;
    let tol = mesh.h() * c(1e-6);
    if z.iter().enumerate().any(|(i, &zi)| (zi - mesh.node(i)).abs() > tol) {
        return Err(Error::InvalidParameter("profile nodes are not uniformly spaced".into()));
    }
    DiscreteFunction::new(mesh, u)
}

/// A smooth positive profile `a (1 + b cos(k pi s))` plus nodal noise, with
/// random `a`, `b`, `k`. Used for multistart probes.
pub(crate) fn random_positive<T: Scalar, R: rand::Rng>(mesh: &Arc<Mesh<T>>, rng: &mut R) -> DiscreteFunction<T> {
    let (a, b, k) = (rng.gen_range(0.1..2.0), rng.gen_range(-0.9..0.9), rng.gen_range(1..6) as f64);
    let (za, len) = (mesh.interval().0.as_f64(), mesh.length().as_f64());
    let values = (0..mesh.n_nodes())
        .map(|i| {
            let s = (mesh.node(i).as_f64() - za) / len;
            let noise: f64 = rng.gen_range(0.0..0.5);
            c(a * (1.0 + b * (k * std::f64::consts::PI * s).cos()) + noise)
        })
        .collect();
    DiscreteFunction { mesh: mesh.clone(), values }
}
