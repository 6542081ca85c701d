//! The whole pipeline instantiated at `f32`.

use qrobin::{
    energy, gradient, minimal_solution, principal_eigenpair, DiscreteFunction, EigenOptions32, FunctionalSpec, Mesh,
    OperatorSpec, PerturbationSpec, ProblemSpec, SolverParams32, Status, XiSpec,
};

fn prob(beta: (f32, f32), f: PerturbationSpec<f32>) -> ProblemSpec<f32> {
    ProblemSpec::new((0.0, 1.0), XiSpec::Const(0.0), beta, f, 2.0).unwrap()
}

#[test]
fn eigenpair_in_single_precision() {
    let opts = EigenOptions32 { n_cells: 128, tol: 1e-3, ..EigenOptions32::default() };
    let neumann = principal_eigenpair(2.0f32, &prob((0.0, 0.0), PerturbationSpec::zero(2.0).unwrap()), &opts).unwrap();
    assert!(neumann.lambda1.abs() < 1e-4);
    let robin = principal_eigenpair(2.0f32, &prob((1.0, 1.0), PerturbationSpec::zero(2.0).unwrap()), &opts).unwrap();
    assert!((robin.lambda1 - 1.70705).abs() < 1e-2, "{}", robin.lambda1);
}

#[test]
fn gradient_agrees_with_f64() {
    let f32p = prob((1.0, 0.5), PerturbationSpec::superlinear_ar(2.0, 1.5, 1.8, 4.0).unwrap());
    let op = OperatorSpec::<f32>::p_laplace(2.0).unwrap();
    let m = Mesh::shared(0.0f32, 1.0, 16).unwrap();
    let u = DiscreteFunction::from_fn(m, |z| 0.5 + z * z).unwrap();
    let spec = FunctionalSpec::phi_lambda(0.3f32, 1.0);
    let g = gradient(&spec, &op, &f32p, &u).unwrap();
    assert!(energy(&spec, &op, &f32p, &u).unwrap().is_finite());

    let f64p = ProblemSpec::new((0.0, 1.0), XiSpec::Const(0.0), (1.0, 0.5), PerturbationSpec::superlinear_ar(2.0, 1.5, 1.8, 4.0).unwrap(), 2.0).unwrap();
    let u64 = DiscreteFunction::from_fn(Mesh::shared(0.0f64, 1.0, 16).unwrap(), |z| 0.5 + z * z).unwrap();
    let g64 = gradient(&FunctionalSpec::phi_lambda(0.3, 1.0), &OperatorSpec::p_laplace(2.0).unwrap(), &f64p, &u64).unwrap();
    for (a, b) in g.values().iter().zip(g64.values()) {
        assert!((*a as f64 - b).abs() < 1e-5 * b.abs().max(1.0));
    }
}

#[test]
fn minimal_solution_in_single_precision() {
    let f = PerturbationSpec::power_sum(2.0f32, vec![(2.0, 2.0), (-1.0, 4.0)]).unwrap();
    let params = SolverParams32 { n_cells: 64, tol_grad: 1e-4, ..SolverParams32::default() };
    let out = minimal_solution(&OperatorSpec::p_laplace(2.0).unwrap(), &prob((0.0, 0.0), f), -1.0, &params).unwrap();
    assert_eq!(out.status, Status::Solution);
    let u = out.u.unwrap();
    assert!((u.max() - 1.0).abs() < 1e-3 && (u.min() - 1.0).abs() < 1e-3);
}
