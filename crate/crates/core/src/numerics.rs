//! Small numerical kernels shared by the modules.

use crate::error::{Error, Result};
use crate::scalar::{c, Scalar};

pub(crate) fn log_spaced<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    let (l0, l1) = (lo.ln(), hi.ln());
    let last = T::from_usize(n - 1).unwrap();
    (0..n)
        .map(|i| (l0 + (l1 - l0) * T::from_usize(i).unwrap() / last).exp())
        .collect()
}

/// Adaptive Simpson quadrature with an absolute tolerance.
pub(crate) fn adaptive_simpson<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let m = (a + b) * c(0.5);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / c(6.0) * (fa + c::<T>(4.0) * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 200)
        .ok_or(Error::Quadrature { a: a.as_f64(), b: b.as_f64() })
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<T: Scalar, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> Option<T> {
    let m = (a + b) * c(0.5);
    let (lm, rm) = ((a + m) * c(0.5), (m + b) * c(0.5));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / c(6.0) * (fa + c::<T>(4.0) * flm + fm);
    let right = (b - m) / c(6.0) * (fm + c::<T>(4.0) * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return None;
    }
    let floor = T::epsilon() * c(16.0) * (left.abs() + right.abs());
    if delta.abs() <= c::<T>(15.0) * tol || delta.abs() <= floor {
        return Some(left + right + delta / c(15.0));
    }
    if depth == 0 {
        return None;
    }
    let half = tol * c(0.5);
    Some(
        simpson_rec(f, a, m, fa, flm, fm, left, half, depth - 1)?
            + simpson_rec(f, m, b, fm, frm, fb, right, half, depth - 1)?,
    )
}

/// Three-point Gauss-Legendre rule on `[a, b]`; exact for polynomials of degree five.
pub(crate) fn gauss3<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T) -> T {
    let half = (b - a) * c(0.5);
    let mid = (a + b) * c(0.5);
    let x = c::<T>(0.6).sqrt() * half;
    half * (c::<T>(5.0 / 9.0) * (f(mid - x) + f(mid + x)) + c::<T>(8.0 / 9.0) * f(mid))
}

/// Shape-preserving piecewise cubic Hermite interpolant.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Pchip<T> {
    x: Vec<T>,
    y: Vec<T>,
    d: Vec<T>,
}

impl<T: Scalar> Pchip<T> {
    pub(crate) fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidParameter(
                "interpolation table needs at least two (t, value) pairs of equal length".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "interpolation nodes must be finite and strictly increasing".into(),
            ));
        }
        let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<T> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![T::zero(); n];
        d[0] = delta[0];
        d[n - 1] = delta[n - 2];
        for k in 1..n - 1 {
            if delta[k - 1] * delta[k] > T::zero() {
                let w1 = c::<T>(2.0) * h[k] + h[k - 1];
                let w2 = h[k] + c::<T>(2.0) * h[k - 1];
                d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
            }
        }
        Ok(Self { x, y, d })
    }

    pub(crate) fn knots(&self) -> &[T] {
        &self.x
    }

    pub(crate) fn first(&self) -> T {
        self.y[0]
    }

    pub(crate) fn last(&self) -> T {
        self.y[self.y.len() - 1]
    }

    /// Evaluates with constant extension outside the table.
    pub(crate) fn eval(&self, t: T) -> T {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let k = match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(k) => return self.y[k],
            Err(k) => k - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = c::<T>(2.0);
        let three = c::<T>(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }
}

/// Tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tridiag<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> Tridiag<T> {
    pub(crate) fn zeros(n: usize) -> Self {
        Self {
            lower: vec![T::zero(); n.saturating_sub(1)],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n.saturating_sub(1)],
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting (the
    /// LAPACK `gtsv` scheme). Returns `None` for a numerically singular matrix.
    pub(crate) fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut dl = self.lower.clone();
        let mut du = self.upper.clone();
        let mut x = b.to_vec();
        if n == 0 {
            return Some(x);
        }
        if n == 1 {
            return if d[0] == T::zero() { None } else { Some(vec![x[0] / d[0]]) };
        }
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == T::zero() {
                    return None;
                }
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                x[i + 1] = x[i + 1] - fact * x[i];
                dl[i] = T::zero();
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    dl[i] = du[i + 1];
                    du[i + 1] = -fact * dl[i];
                } else {
                    dl[i] = T::zero();
                }
                du[i] = temp;
                let tb = x[i];
                x[i] = x[i + 1];
                x[i + 1] = tb - fact * x[i + 1];
            }
        }
        if d[n - 1] == T::zero() {
            return None;
        }
        x[n - 1] = x[n - 1] / d[n - 1];
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - dl[i] * x[i + 2]) / d[i];
        }
        if x.iter().all(|v| v.is_finite()) {
            Some(x)
        } else {
            None
        }
    }

    #[cfg(test)]
    pub(crate) fn mul(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub(crate) fn inf_norm<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}
