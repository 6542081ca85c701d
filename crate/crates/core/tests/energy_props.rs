//! Gradients, scaling and comparison properties of the energy functionals.

mod common;

use common::*;
use qrobin::{
    diaz_saa_convexity, energy, gradient, rayleigh, AuxCoeffs, DiazSaaProbe, DiscreteFunction, FunctionalSpec,
    OperatorSpec, PerturbationSpec, ProblemSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random values kept away from the kinks at 0, 1 and the barrier.
fn random_u(prob: &ProblemSpec<f64>, n: usize, barrier: f64, rng: &mut ChaCha8Rng) -> DiscreteFunction<f64> {
    let mesh = mesh(prob, n);
    let values = (0..=n)
        .map(|_| loop {
            let x: f64 = rng.gen_range(-0.5..2.5);
            if [0.0, 1.0, barrier].iter().all(|k| (x - k).abs() > 1e-3) {
                break x;
            }
        })
        .collect();
    DiscreteFunction::new(mesh, values).unwrap()
}

fn families(prob: &ProblemSpec<f64>, barrier: f64, p: f64) -> Vec<FunctionalSpec<f64>> {
    let b = DiscreteFunction::constant(mesh(prob, 32), barrier);
    let aux = AuxCoeffs { c9: 1.3, c10: 0.7, q_exp: p, r_exp: p + 2.0 };
    vec![
        FunctionalSpec::mu(),
        FunctionalSpec::phi_lambda(-0.5, prob.default_eta()),
        FunctionalSpec::trunc_cap(0.3, prob.default_eta(), b.clone()),
        FunctionalSpec::trunc_cap(0.3, prob.default_eta(), b.clone()).with_aux(aux),
        FunctionalSpec::trunc_floor(0.3, prob.default_eta(), b),
        FunctionalSpec::aux_psi(aux),
        FunctionalSpec::super_psi(-1.0, prob.default_eta()),
        FunctionalSpec::robin_w(0.7, 0.0),
    ]
}

fn check_gradients(op: &OperatorSpec<f64>, prob: &ProblemSpec<f64>, tol: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let barrier = 0.9;
    for spec in families(prob, barrier, prob.p) {
        for _ in 0..20 {
            let u = random_u(prob, 32, barrier, &mut rng);
            let g = gradient(&spec, op, prob, &u).unwrap();
            let mut fd = vec![0.0; u.values().len()];
            for i in 0..fd.len() {
                let step = 1e-6 * u.values()[i].abs().max(1.0);
                let mut up = u.values().to_vec();
                let mut dn = u.values().to_vec();
                up[i] += step;
                dn[i] -= step;
                let eu = energy(&spec, op, prob, &DiscreteFunction::new(u.mesh().clone(), up).unwrap()).unwrap();
                let ed = energy(&spec, op, prob, &DiscreteFunction::new(u.mesh().clone(), dn).unwrap()).unwrap();
                fd[i] = (eu - ed) / (2.0 * step);
            }
            let err = fd.iter().zip(g.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = g.values().iter().map(|x| x.abs()).fold(0.0, f64::max);
            assert!(err <= tol * scale, "{:?} p = {}: {err} vs {scale}", spec.family, prob.p);
        }
    }
}

#[test]
fn gradients_match_finite_differences_p2() {
    let prob = unit(0.5, (1.0, 0.5), f1());
    check_gradients(&p_laplace(2.0), &prob, 1e-6);
    check_gradients(&OperatorSpec::mean_curvature(2.0).unwrap(), &prob, 1e-6);
}

#[test]
fn gradients_match_finite_differences_p3() {
    let f = PerturbationSpec::superlinear_ar(3.0, 1.5, 2.0, 4.0).unwrap();
    let prob = problem((0.0, 2.0), -0.3, (0.5, 2.0), f);
    check_gradients(&p_laplace(3.0), &prob, 1e-6);
    check_gradients(&OperatorSpec::pq_laplace(3.0, 2.0).unwrap(), &prob, 1e-6);
}

#[test]
fn gradients_match_finite_differences_p15() {
    let f = PerturbationSpec::sublinear_example(1.5, 1.2, 1.4, 1.3, 1.1).unwrap();
    let prob = unit(1.0, (1.0, 1.0), f);
    check_gradients(&p_laplace(1.5), &prob, 1e-4);
}

#[test]
fn rayleigh_is_scale_invariant() {
    let prob = unit(0.7, (1.0, 2.0), zero(2.0));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for r in [2.0, 3.0, 1.5] {
        for _ in 0..10 {
            let u = random_u(&prob, 64, 5.0, &mut rng);
            let base = rayleigh(r, &prob, &u).unwrap();
            for t in [1e-3, 0.5, -2.0, 1e4] {
                let v = rayleigh(r, &prob, &u.scaled(t)).unwrap();
                assert!((v - base).abs() <= 1e-10 * base.abs().max(1.0));
            }
        }
    }
}

#[test]
fn rayleigh_of_zero_errors() {
    let prob = unit(0.0, (0.0, 0.0), zero(2.0));
    assert!(rayleigh(2.0, &prob, &DiscreteFunction::constant(mesh(&prob, 8), 0.0)).is_err());
}

#[test]
fn truncated_functionals_agree_with_phi_lambda() {
    let prob = unit(0.4, (1.0, 1.0), f1());
    let op = p_laplace(2.0);
    let eta = prob.default_eta();
    let m = mesh(&prob, 64);
    let barrier = DiscreteFunction::from_fn(m.clone(), |z| 1.0 + 0.5 * z).unwrap();
    let phi = FunctionalSpec::phi_lambda(0.3, eta);
    let cap = FunctionalSpec::trunc_cap(0.3, eta, barrier.clone());
    let floor = FunctionalSpec::trunc_floor(0.3, eta, barrier.clone());

    let below = DiscreteFunction::from_fn(m.clone(), |z| 0.2 + 0.7 * z * (1.0 - z)).unwrap();
    let e_phi = energy(&phi, &op, &prob, &below).unwrap();
    assert!((energy(&cap, &op, &prob, &below).unwrap() - e_phi).abs() < 1e-12);

    // Above the barrier the floor functional differs from PhiLambda by a constant.
    let a1 = DiscreteFunction::from_fn(m.clone(), |z| 1.6 + z).unwrap();
    let a2 = DiscreteFunction::from_fn(m, |z| 2.0 + (3.0 * z).sin()).unwrap();
    let d1 = energy(&floor, &op, &prob, &a1).unwrap() - energy(&phi, &op, &prob, &a1).unwrap();
    let d2 = energy(&floor, &op, &prob, &a2).unwrap() - energy(&phi, &op, &prob, &a2).unwrap();
    assert!((d1 - d2).abs() < 1e-10, "{d1} vs {d2}");
}

#[test]
fn phi_lambda_is_coercive_below_the_principal_eigenvalue() {
    let prob = unit(0.0, (0.0, 0.0), sublinear_example());
    let op = p_laplace(2.0);
    let spec = FunctionalSpec::phi_lambda(-1.0, prob.default_eta());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let u = random_u(&prob, 64, 5.0, &mut rng);
        let e: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|t| energy(&spec, &op, &prob, &u.scaled(*t)).unwrap()).collect();
        assert!(e[0] < e[1] && e[1] < e[2], "{e:?}");
    }
}

#[test]
fn diaz_saa_functional_is_convex_for_laplacian() {
    let prob = unit(1.0, (1.0, 1.0), zero(2.0));
    let op = p_laplace(2.0);
    let m = mesh(&prob, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let mut pos = || {
            let (a, k): (f64, f64) = (rng.gen_range(0.1..3.0), rng.gen_range(1.0..4.0));
            DiscreteFunction::from_fn(m.clone(), move |z| a * (1.2 + (k * z).sin())).unwrap()
        };
        let (u1, u2) = (pos(), pos());
        let report = diaz_saa_convexity(&DiazSaaProbe { u1, u2, samples: 11, q_convexity: 2.0 }, &op, &prob).unwrap();
        let scale = report.values.iter().map(|v| v.abs()).fold(1.0, f64::max);
        assert!(report.max_violation <= 1e-12 * scale, "{}", report.max_violation);
    }
    let u = DiscreteFunction::from_fn(m.clone(), |z| 1.0 + z).unwrap();
    let same = diaz_saa_convexity(&DiazSaaProbe { u1: u.clone(), u2: u.clone(), samples: 5, q_convexity: 2.0 }, &op, &prob).unwrap();
    assert!(same.max_violation.abs() < 1e-14);

    let sign_changing = DiscreteFunction::from_fn(m, |z| z - 0.5).unwrap();
    assert!(diaz_saa_convexity(&DiazSaaProbe { u1: u, u2: sign_changing, samples: 5, q_convexity: 2.0 }, &op, &prob).is_err());
}
