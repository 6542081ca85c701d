//! Unconstrained smooth optimization on nodal vectors: preconditioned L-BFGS,
//! a tridiagonal Newton polish, and max-point path deformation for saddles.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::numerics::{dot, inf_norm, Tridiag};
use crate::scalar::{c, Scalar};

pub(crate) trait Objective<T: Scalar> {
    fn dim(&self) -> usize;

    /// Value at `x`; fills `grad` when given.
    fn eval(&self, x: &[T], grad: Option<&mut [T]>) -> Result<T>;

    /// SPD approximation of the Hessian used as the L-BFGS base metric.
    fn precondition(&self) -> Option<Tridiag<T>> {
        None
    }

    fn value_grad(&self, x: &[T]) -> Result<(T, Vec<T>)> {
        let mut g = vec![T::zero(); self.dim()];
        let f = self.eval(x, Some(&mut g))?;
        Ok((f, g))
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LbfgsOptions<T> {
    pub tol_grad: T,
    pub max_iters: usize,
    pub memory: usize,
    /// Stop once `||x||_inf` exceeds this.
    pub divergence: T,
}

#[derive(Debug, Clone)]
pub(crate) struct LbfgsReport<T> {
    pub x: Vec<T>,
    pub f: T,
    pub grad_norm: T,
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    pub trace: Vec<T>,
}

fn apply_metric<T: Scalar>(p: &Option<Tridiag<T>>, v: &[T]) -> Vec<T> {
    match p {
        Some(m) => m.solve(v).unwrap_or_else(|| v.to_vec()),
        None => v.to_vec(),
    }
}

/// `|df|` at or below this is indistinguishable from rounding.
fn noise_floor<T: Scalar>(f: T) -> T {
    T::epsilon() * c(1e3) * (T::one() + f.abs())
}

pub(crate) fn lbfgs<T: Scalar, O: Objective<T> + ?Sized>(
    obj: &O,
    x0: &[T],
    opts: &LbfgsOptions<T>,
) -> Result<LbfgsReport<T>> {
    let n = obj.dim();
    let pre = obj.precondition();
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj.value_grad(&x)?;
    let mut trace = vec![f];
    let mut hist: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::new();
    let mut gamma = T::one();
    let mut failures = 0;
    let mut it = 0;
    let c1 = c::<T>(1e-4);
    while it < opts.max_iters {
        let gn = inf_norm(&g);
        if gn < opts.tol_grad {
            return Ok(LbfgsReport { x, f, grad_norm: gn, iterations: it, converged: true, diverged: false, trace });
        }
        if !f.is_finite() || inf_norm(&x) > opts.divergence {
            return Ok(LbfgsReport { x, f, grad_norm: gn, iterations: it, converged: false, diverged: true, trace });
        }
        it += 1;

        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = *rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * *yi;
            }
            alphas.push(a);
        }
        let mut r = apply_metric(&pre, &q);
        r.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
            let b = *rho * dot(y, &r);
            for (ri, si) in r.iter_mut().zip(s) {
                *ri += *si * (a - b);
            }
        }
        let mut d: Vec<T> = r.into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if !(slope < T::zero()) || !slope.is_finite() {
            hist.clear();
            d = apply_metric(&pre, &g).into_iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let mut step = T::one();
        if hist.is_empty() && pre.is_none() {
            step = T::one().min(T::one() / inf_norm(&d).max(T::min_positive_value()));
        }

        let mut accepted = None;
        let mut xt = vec![T::zero(); n];
        for _ in 0..50 {
            for i in 0..n {
                xt[i] = x[i] + step * d[i];
            }
            let (ft, gt) = obj.value_grad(&xt)?;
            if ft.is_finite() {
                let armijo = ft <= f + c1 * step * slope;
                let noisy = (ft - f).abs() <= noise_floor(f) && inf_norm(&gt) < inf_norm(&g);
                if armijo || noisy {
                    accepted = Some((ft, gt));
                    break;
                }
            }
            step *= c(0.5);
        }
        let Some((ft, gt)) = accepted else {
            failures += 1;
            hist.clear();
            gamma = T::one();
            if failures >= 2 {
                break;
            }
            continue;
        };
        failures = 0;
        let s: Vec<T> = (0..n).map(|i| xt[i] - x[i]).collect();
        let y: Vec<T> = (0..n).map(|i| gt[i] - g[i]).collect();
        let sy = dot(&s, &y);
        if sy > c::<T>(1e-12) * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > T::zero() {
            let hy = apply_metric(&pre, &y);
            let yhy = dot(&y, &hy);
            if yhy > T::zero() {
                gamma = sy / yhy;
            }
            hist.push_back((s, y, T::one() / sy));
            if hist.len() > opts.memory {
                hist.pop_front();
            }
        }
        x = xt;
        f = ft;
        g = gt;
        trace.push(f);
    }
    let gn = inf_norm(&g);
    let diverged = !f.is_finite() || inf_norm(&x) > opts.divergence;
    Ok(LbfgsReport { x, f, grad_norm: gn, iterations: it, converged: gn < opts.tol_grad, diverged, trace })
}

/// Tridiagonal Jacobian of the gradient by central differences, three colours.
pub(crate) fn fd_hessian<T: Scalar, O: Objective<T> + ?Sized>(obj: &O, x: &[T]) -> Result<Tridiag<T>> {
    let n = obj.dim();
    let mut jac = Tridiag::zeros(n);
    let base = T::epsilon().cbrt();
    let steps: Vec<T> = x.iter().map(|v| base * T::one().max(v.abs())).collect();
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    let mut gp = vec![T::zero(); n];
    let mut gm = vec![T::zero(); n];
    for colour in 0..3 {
        xp.copy_from_slice(x);
        xm.copy_from_slice(x);
        for i in (colour..n).step_by(3) {
            xp[i] += steps[i];
            xm[i] -= steps[i];
        }
        obj.eval(&xp, Some(&mut gp))?;
        obj.eval(&xm, Some(&mut gm))?;
        for i in (colour..n).step_by(3) {
            let two_h = (xp[i] - xm[i]).max(T::min_positive_value());
            jac.diag[i] = (gp[i] - gm[i]) / two_h;
            if i + 1 < n {
                jac.lower[i] = (gp[i + 1] - gm[i + 1]) / two_h;
            }
            if i > 0 {
                jac.upper[i - 1] = (gp[i - 1] - gm[i - 1]) / two_h;
            }
        }
    }
    // symmetrize
    for i in 0..n.saturating_sub(1) {
        let m = (jac.lower[i] + jac.upper[i]) * c(0.5);
        jac.lower[i] = m;
        jac.upper[i] = m;
    }
    Ok(jac)
}

#[derive(Debug, Clone)]
pub(crate) struct NewtonReport<T> {
    pub x: Vec<T>,
    pub f: T,
    pub grad_norm: T,
    pub iterations: usize,
}

/// Damped Newton on `grad = 0`; converges to saddles as well as minima.
pub(crate) fn newton_refine<T: Scalar, O: Objective<T> + ?Sized>(
    obj: &O,
    x0: &[T],
    tol: T,
    max_iters: usize,
) -> Result<NewtonReport<T>> {
    let n = obj.dim();
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj.value_grad(&x)?;
    let mut it = 0;
    while it < max_iters && inf_norm(&g) >= tol {
        it += 1;
        let jac = fd_hessian(obj, &x)?;
        let Some(dx) = jac.solve(&g) else { break };
        let g0 = dot(&g, &g).sqrt();
        let mut step = T::one();
        let mut improved = false;
        for _ in 0..30 {
            let xt: Vec<T> = (0..n).map(|i| x[i] - step * dx[i]).collect();
            let (ft, gt) = obj.value_grad(&xt)?;
            let gn = dot(&gt, &gt).sqrt();
            if ft.is_finite() && gn < (T::one() - c::<T>(1e-4) * step) * g0 {
                x = xt;
                f = ft;
                g = gt;
                improved = true;
                break;
            }
            step *= c(0.5);
        }
        if !improved {
            break;
        }
    }
    Ok(NewtonReport { grad_norm: inf_norm(&g), x, f, iterations: it })
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PathOptions<T> {
    pub deform_steps: usize,
    pub descent_tol: T,
    pub tol_grad: T,
    pub collapse_limit: usize,
    pub newton_iters: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct PathReport<T> {
    pub x: Vec<T>,
    pub level: T,
    pub grad_norm: T,
    pub steps: usize,
    pub newton_iterations: usize,
}

fn respace<T: Scalar>(path: &mut [Vec<T>]) {
    let m = path.len();
    let mut cum = vec![T::zero(); m];
    for k in 1..m {
        let d: T = path[k].iter().zip(&path[k - 1]).map(|(a, b)| (*a - *b) * (*a - *b)).sum();
        cum[k] = cum[k - 1] + d.sqrt();
    }
    let total = cum[m - 1];
    if !(total > T::zero()) {
        return;
    }
    let old = path.to_vec();
    let mut seg = 0;
    for (k, slot) in path.iter_mut().enumerate().take(m - 1).skip(1) {
        let target = total * T::from_usize(k).unwrap() / T::from_usize(m - 1).unwrap();
        while seg + 1 < m - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let w = if len > T::zero() { (target - cum[seg]) / len } else { T::zero() };
        for (i, v) in slot.iter_mut().enumerate() {
            *v = old[seg][i] * (T::one() - w) + old[seg + 1][i] * w;
        }
    }
}

fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum::<T>().sqrt()
}

/// Max-point path deformation. `path[0]` is the low minimizer and the last point
/// the far endpoint with lower energy; interior points are moved in place.
pub(crate) fn deform_path<T: Scalar, O: Objective<T> + ?Sized>(
    obj: &O,
    mut path: Vec<Vec<T>>,
    opts: &PathOptions<T>,
) -> Result<PathReport<T>> {
    let m = path.len();
    if m < 5 {
        return Err(Error::InvalidParameter(format!("path needs at least 5 points, got {m}")));
    }
    let pre = obj.precondition();
    let f_low = obj.eval(&path[0], None)?;
    let mut values: Vec<T> = path.iter().map(|x| obj.eval(x, None)).collect::<Result<_>>()?;
    let mut collapses = 0;
    let mut best_hist: VecDeque<T> = VecDeque::new();
    let mut steps = 0;
    let mut k_star;
    loop {
        k_star = (1..m - 1).fold(1, |b, k| if values[k] > values[b] { k } else { b });
        if steps >= opts.deform_steps {
            break;
        }
        let level = values[k_star];
        if level <= f_low + noise_floor(f_low) || k_star == 1 && values[1] <= values[0] + noise_floor(f_low) {
            collapses += 1;
            if collapses >= opts.collapse_limit {
                return Err(Error::PathCollapse);
            }
        } else {
            collapses = 0;
        }
        let (f, g) = obj.value_grad(&path[k_star])?;
        if inf_norm(&g) < opts.descent_tol {
            break;
        }
        best_hist.push_back(f);
        if best_hist.len() > 60 {
            best_hist.pop_front();
            let first = best_hist[0];
            if (first - f).abs() <= c::<T>(1e-13) * (T::one() + f.abs()) {
                break;
            }
        }
        steps += 1;
        let d: Vec<T> = apply_metric(&pre, &g).into_iter().map(|v| -v).collect();
        let dn = dot(&d, &d).sqrt();
        if !(dn > T::zero()) {
            break;
        }
        let seg = dist(&path[k_star - 1], &path[k_star]).min(dist(&path[k_star + 1], &path[k_star]));
        let mut step = T::one().min(seg.max(T::epsilon()) / dn);
        let slope = dot(&g, &d);
        let mut moved = false;
        for _ in 0..40 {
            let xt: Vec<T> = path[k_star].iter().zip(&d).map(|(x, di)| *x + step * *di).collect();
            let ft = obj.eval(&xt, None)?;
            if ft.is_finite() && ft <= f + c::<T>(1e-4) * step * slope {
                path[k_star] = xt;
                values[k_star] = ft;
                moved = true;
                break;
            }
            step *= c(0.5);
        }
        if !moved {
            break;
        }
        if steps % 10 == 0 {
            respace(&mut path);
            for k in 1..m - 1 {
                values[k] = obj.eval(&path[k], None)?;
            }
        }
    }
    let nr = newton_refine(obj, &path[k_star], opts.tol_grad, opts.newton_iters)?;
    Ok(PathReport { level: nr.f, grad_norm: nr.grad_norm, x: nr.x, steps, newton_iterations: nr.iterations })
}
