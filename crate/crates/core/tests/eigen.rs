//! Principal eigenpair against closed forms, a dense eigensolver and random trial functions.

mod common;

use common::*;
use qrobin::mesh::lp_norm;
use qrobin::{
    check_simplicity, principal_eigenpair, principal_eigenpair_on, rayleigh, DiscreteFunction, EigenOptions,
    ProblemSpec, XiSpec,
};
use qrobin_oracles::eigen::dense_robin_laplacian;
use qrobin_oracles::roots::robin_frequency;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts(n: usize) -> EigenOptions<f64> {
    EigenOptions { n_cells: n, ..EigenOptions::default() }
}

#[test]
fn neumann_zero_potential_is_constant() {
    let res = principal_eigenpair(2.0, &unit(0.0, (0.0, 0.0), zero(2.0)), &opts(128)).unwrap();
    assert!(res.lambda1.abs() < 1e-8);
    assert!(res.u1.max() - res.u1.min() < 1e-8);
}

#[test]
fn constant_potential_shifts_eigenvalue() {
    let res = principal_eigenpair(2.0, &unit(5.0, (0.0, 0.0), zero(2.0)), &opts(128)).unwrap();
    assert!((res.lambda1 - 5.0).abs() < 1e-8);
}

#[test]
fn robin_matches_transcendental_root() {
    let w = robin_frequency(1.0, 1.0);
    let res = principal_eigenpair(2.0, &unit(0.0, (1.0, 1.0), zero(2.0)), &opts(1024)).unwrap();
    assert!((res.lambda1 - w * w).abs() < 1e-3, "{} vs {}", res.lambda1, w * w);
    assert!(res.u1.min() > 0.0);
    assert!((lp_norm(&res.u1, 2.0) - 1.0).abs() < 1e-10);
}

#[test]
fn matches_dense_eigensolver_on_same_discretization() {
    for (xi, beta) in [(0.0, (1.0, 1.0)), (-2.0, (0.5, 3.0)), (1.5, (0.0, 2.0))] {
        let prob = unit(xi, beta, zero(2.0));
        let res = principal_eigenpair(2.0, &prob, &opts(128)).unwrap();
        let dense = dense_robin_laplacian(1.0, 128, xi, beta);
        assert!((res.lambda1 - dense).abs() < 1e-8, "{} vs {dense}", res.lambda1);
    }
}

#[test]
fn discretization_error_decreases_under_refinement() {
    let w = robin_frequency(1.0, 1.0);
    let prob = unit(0.0, (1.0, 1.0), zero(2.0));
    let errs: Vec<f64> = [32, 64, 128, 256]
        .iter()
        .map(|&n| (principal_eigenpair(2.0, &prob, &opts(n)).unwrap().lambda1 - w * w).abs())
        .collect();
    for e in errs.windows(2) {
        assert!(e[1] < 0.3 * e[0], "{errs:?}");
    }
}

fn random_trial(prob: &ProblemSpec<f64>, n: usize, rng: &mut ChaCha8Rng) -> DiscreteFunction<f64> {
    let m = mesh(prob, n);
    let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    DiscreteFunction::from_fn(m, |z| {
        c[0] + 1.5 + c[1] * (3.0 * z).sin() + c[2] * z * z + 0.5 * c[3] * (9.0 * z).cos()
    })
    .unwrap()
}

#[test]
fn eigenvalue_is_infimum_of_rayleigh_quotient() {
    let xi = XiSpec::Nodes(vec![1.0, -2.0, 0.5, 3.0]);
    for r in [2.0, 3.0] {
        let prob = ProblemSpec::new((0.0, 1.0), xi.clone(), (0.5, 2.0), zero(r), r).unwrap();
        let res = principal_eigenpair(r, &prob, &opts(128)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let v = random_trial(&prob, 128, &mut rng);
            assert!(res.lambda1 <= rayleigh(r, &prob, &v).unwrap() + 1e-9);
        }
        assert!((rayleigh(r, &prob, &res.u1).unwrap() - res.lambda1).abs() < 1e-9);
    }
}

#[test]
fn eigenvalue_is_monotone_in_potential() {
    let base = principal_eigenpair(2.0, &unit(0.3, (1.0, 0.5), zero(2.0)), &opts(128)).unwrap().lambda1;
    for shift in [-1.0, 0.5, 4.0] {
        let moved = principal_eigenpair(2.0, &unit(0.3 + shift, (1.0, 0.5), zero(2.0)), &opts(128)).unwrap().lambda1;
        assert!((moved - base - shift).abs() < 1e-8);
    }
}

#[test]
fn principal_eigenfunction_is_simple() {
    let cases = [
        unit(0.0, (0.0, 0.0), zero(2.0)),
        unit(0.0, (1.0, 1.0), zero(2.0)),
        ProblemSpec::new((0.0, 1.0), XiSpec::Nodes(vec![2.0, -3.0, 1.0]), (1.0, 0.0), zero(2.0), 2.0).unwrap(),
    ];
    for prob in cases {
        let res = principal_eigenpair(2.0, &prob, &opts(128)).unwrap();
        let report = check_simplicity(&res, &prob, 2.0, 8, &opts(128)).unwrap();
        assert_eq!(report.failures, 0);
        assert!(report.max_c1_distance < 1e-6, "{}", report.max_c1_distance);
        assert!(report.lambda_spread < 1e-8);
    }
}

#[test]
fn simplicity_needs_five_starts() {
    let prob = unit(0.0, (1.0, 1.0), zero(2.0));
    let res = principal_eigenpair(2.0, &prob, &opts(64)).unwrap();
    assert!(check_simplicity(&res, &prob, 2.0, 4, &opts(64)).is_err());
}

#[test]
fn p_laplacian_eigenpair_on_longer_interval() {
    let prob = problem((-1.0, 2.0), 0.0, (1.0, 1.0), zero(3.0));
    let m = mesh(&prob, 192);
    let res = principal_eigenpair_on(3.0, &prob, m, &opts(192)).unwrap();
    assert!(res.u1.min() > 0.0);
    assert!(res.residual < 1e-9);
    // The eigenfunction of a symmetric problem is symmetric.
    let v = res.u1.values();
    for i in 0..v.len() {
        assert!((v[i] - v[v.len() - 1 - i]).abs() < 1e-6);
    }
}
