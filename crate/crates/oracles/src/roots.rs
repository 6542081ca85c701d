/// Bisection on a sign change of `g` in `[lo, hi]`.
pub fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let (mut glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        return Some(lo);
    }
    if ghi == 0.0 {
        return Some(hi);
    }
    if glo.signum() == ghi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 || hi - lo < tol {
            return Some(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// First positive root of `tan w = w (bl + br) / (w^2 - bl br)`, the
/// principal Robin frequency of `-u'' = lambda u` on an interval of length 1.
/// The principal eigenvalue is `w^2`.
pub fn robin_frequency(beta_left: f64, beta_right: f64) -> f64 {
    let g = |w: f64| (w * w - beta_left * beta_right) * w.sin() - w * (beta_left + beta_right) * w.cos();
    let n = 20_000;
    let mut prev = 1e-9;
    for k in 1..=n {
        let w = std::f64::consts::PI * k as f64 / n as f64;
        if g(prev).signum() != g(w).signum() {
            return bisect(g, prev, w, 1e-15).unwrap();
        }
        prev = w;
    }
    panic!("no Robin frequency found in (0, pi)");
}

/// Positive root of `lambda m + 2 m - m^3 = 0`.
pub fn cubic_constant_root(lambda: f64) -> f64 {
    (lambda + 2.0).sqrt()
}
