//! Shooting for positive solutions of
//! `-(|u'|^{p-2} u')' + xi(z) u^{p-1} = lambda u^{p-1} + f(u)` with Robin
//! conditions, written as a first-order system in `(u, w = |u'|^{p-2} u')`.

pub struct ShootingProblem<'a> {
    pub p: f64,
    pub interval: (f64, f64),
    pub beta: (f64, f64),
    pub lambda: f64,
    pub xi: &'a dyn Fn(f64) -> f64,
    pub f: &'a dyn Fn(f64) -> f64,
    pub steps: usize,
}

pub struct Trajectory {
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    /// `w(b) + beta_R u(b)^{p-1}`: zero for a solution.
    pub mismatch: f64,
    pub positive: bool,
}

impl ShootingProblem<'_> {
    fn rhs(&self, z: f64, u: f64, w: f64) -> (f64, f64) {
        let p = self.p;
        let du = w.signum() * w.abs().powf(1.0 / (p - 1.0));
        let up = u.max(0.0).powf(p - 1.0);
        let dw = ((self.xi)(z) - self.lambda) * up - (self.f)(u);
        (du, dw)
    }

    /// Integrates from the left end with `u(a) = alpha`.
    pub fn shoot(&self, alpha: f64) -> Trajectory {
        let (a, b) = self.interval;
        let n = self.steps;
        let h = (b - a) / n as f64;
        let mut u = alpha;
        let mut w = self.beta.0 * alpha.powf(self.p - 1.0);
        let mut zs = vec![a];
        let mut us = vec![u];
        let mut positive = alpha > 0.0;
        for k in 0..n {
            let z = a + k as f64 * h;
            let (k1u, k1w) = self.rhs(z, u, w);
            let (k2u, k2w) = self.rhs(z + 0.5 * h, u + 0.5 * h * k1u, w + 0.5 * h * k1w);
            let (k3u, k3w) = self.rhs(z + 0.5 * h, u + 0.5 * h * k2u, w + 0.5 * h * k2w);
            let (k4u, k4w) = self.rhs(z + h, u + h * k3u, w + h * k3w);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
            if !(u.is_finite() && w.is_finite()) || u.abs() > 1e8 {
                return Trajectory { z: zs, u: us, mismatch: f64::NAN, positive: false };
            }
            if u <= 0.0 {
                positive = false;
            }
            zs.push(z + h);
            us.push(u);
        }
        let mismatch = w + self.beta.1 * u.max(0.0).powf(self.p - 1.0);
        Trajectory { z: zs, u: us, mismatch, positive }
    }

    /// All initial values `alpha` in `[lo, hi]` (log-scanned with `samples`
    /// points, then bisected) that give positive solutions.
    pub fn positive_solutions(&self, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
        let alphas: Vec<f64> = (0..samples)
            .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (samples - 1) as f64).exp())
            .collect();
        let eval = |a: f64| {
            let t = self.shoot(a);
            if t.positive && t.mismatch.is_finite() {
                Some(t.mismatch)
            } else {
                None
            }
        };
        let mut roots = Vec::new();
        let vals: Vec<Option<f64>> = alphas.iter().map(|&a| eval(a)).collect();
        for k in 0..samples - 1 {
            if let (Some(m0), Some(m1)) = (vals[k], vals[k + 1]) {
                if m0 == 0.0 {
                    roots.push(alphas[k]);
                } else if m0.signum() != m1.signum() {
                    let (mut a, mut b, mut ma) = (alphas[k], alphas[k + 1], m0);
                    let mut ok = true;
                    for _ in 0..100 {
                        let mid = 0.5 * (a + b);
                        match eval(mid) {
                            Some(mm) if mm.signum() == ma.signum() => {
                                a = mid;
                                ma = mm;
                            }
                            Some(_) => b = mid,
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok {
                        roots.push(0.5 * (a + b));
                    }
                }
            }
        }
        roots
    }
}
