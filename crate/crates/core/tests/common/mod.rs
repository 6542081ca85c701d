#![allow(dead_code)]

use std::sync::Arc;

use qrobin::{Mesh, OperatorSpec, PerturbationSpec, ProblemSpec, XiSpec};

pub fn p_laplace(p: f64) -> OperatorSpec<f64> {
    OperatorSpec::p_laplace(p).unwrap()
}

pub fn problem(interval: (f64, f64), xi: f64, beta: (f64, f64), f: PerturbationSpec<f64>) -> ProblemSpec<f64> {
    let p = f.p();
    ProblemSpec::new(interval, XiSpec::Const(xi), beta, f, p).unwrap()
}

pub fn unit(xi: f64, beta: (f64, f64), f: PerturbationSpec<f64>) -> ProblemSpec<f64> {
    problem((0.0, 1.0), xi, beta, f)
}

pub fn mesh(prob: &ProblemSpec<f64>, n: usize) -> Arc<Mesh<f64>> {
    Mesh::shared(prob.interval.0, prob.interval.1, n).unwrap()
}

pub fn zero(p: f64) -> PerturbationSpec<f64> {
    PerturbationSpec::zero(p).unwrap()
}

/// `2x - x^3`, whose constant Neumann solutions solve `lambda m + 2m - m^3 = 0`.
pub fn cubic() -> PerturbationSpec<f64> {
    PerturbationSpec::power_sum(2.0, vec![(2.0, 2.0), (-1.0, 4.0)]).unwrap()
}

/// `x^{1/2}`: strictly positive, sublinear, `f(x)/x` strictly decreasing.
pub fn root() -> PerturbationSpec<f64> {
    PerturbationSpec::power_sum(2.0, vec![(1.0, 1.5)]).unwrap()
}

pub fn sublinear_example() -> PerturbationSpec<f64> {
    PerturbationSpec::sublinear_example(2.0, 1.5, 2.0, 1.8, 1.4).unwrap()
}

pub fn f1() -> PerturbationSpec<f64> {
    PerturbationSpec::superlinear_ar(2.0, 1.5, 1.8, 4.0).unwrap()
}
