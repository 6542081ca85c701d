//! Acceptance gate: one PASS/FAIL line per criterion, then a single assertion.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use qrobin::{
    c1_distance, check_left_continuity, detect_lambda_star, diaz_saa_convexity, energy, gradient, minimal_solution,
    minimal_solution_from, multistart_functional, multistart_uniqueness, picone_defect, principal_eigenpair, residual,
    second_solution, solve_auxiliary, solve_auxiliary_with, sweep, AuxCoeffs, DiazSaaProbe, DiscreteFunction,
    EigenOptions, FunctionalSpec, Mesh, MountainPassParams, OperatorSpec, PerturbationSpec, ProblemSpec,
    SolverParams, Status, XiSpec,
};
use qrobin_oracles::roots::robin_frequency;
use qrobin_oracles::shooting::ShootingProblem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn problem(interval: (f64, f64), xi: f64, beta: (f64, f64), f: PerturbationSpec<f64>) -> ProblemSpec<f64> {
    let p = f.p();
    ProblemSpec::new(interval, XiSpec::Const(xi), beta, f, p).unwrap()
}

fn lap(p: f64) -> OperatorSpec<f64> {
    OperatorSpec::p_laplace(p).unwrap()
}

fn eig_opts(n: usize) -> EigenOptions<f64> {
    EigenOptions { n_cells: n, ..EigenOptions::default() }
}

fn params(n: usize) -> SolverParams<f64> {
    SolverParams { n_cells: n, ..SolverParams::default() }
}

fn within(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e < limit, format!("{:.2}s (limit {}s)", e.as_secs_f64(), limit.as_secs()))
}

fn sci(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ")
}

fn sup_dist(u: &DiscreteFunction<f64>, c: f64) -> f64 {
    u.values().iter().map(|v| (v - c).abs()).fold(0.0, f64::max)
}

fn random_positive(mesh: &std::sync::Arc<Mesh<f64>>, rng: &mut ChaCha8Rng) -> DiscreteFunction<f64> {
    let (a, b, k, ph): (f64, f64, f64, f64) =
        (rng.gen_range(0.2..3.0), rng.gen_range(-0.8..0.8), rng.gen_range(0.5..4.0), rng.gen_range(0.0..6.0));
    DiscreteFunction::from_fn(mesh.clone(), move |z| a * (1.0 + b * (k * z + ph).sin()) + 0.05).unwrap()
}

// 1. Trivial eigenvalues.
fn criterion_1() -> Outcome {
    let t = Instant::now();
    let base = principal_eigenpair(2.0, &problem((0.0, 1.0), 0.0, (0.0, 0.0), PerturbationSpec::zero(2.0).unwrap()), &eig_opts(256)).unwrap();
    let (fast, time) = within(t, Duration::from_secs(1));
    let flat = base.u1.max() - base.u1.min();
    let mut worst_shift = 0.0f64;
    for c in [-2.0, 0.5, 3.0] {
        let l = principal_eigenpair(2.0, &problem((0.0, 1.0), c, (0.0, 0.0), PerturbationSpec::zero(2.0).unwrap()), &eig_opts(256)).unwrap().lambda1;
        worst_shift = worst_shift.max((l - base.lambda1 - c).abs());
    }
    let ok = base.lambda1.abs() < 1e-8 && flat < 1e-8 && worst_shift < 1e-8 && fast;
    (ok, format!("lambda1 = {:.1e}, oscillation {:.1e}, shift error {:.1e}, {time}", base.lambda1, flat, worst_shift))
}

// 2. Robin eigenvalue against the transcendental root.
fn criterion_2() -> Outcome {
    let t = Instant::now();
    let w = robin_frequency(1.0, 1.0);
    let exact = w * w;
    let prob = problem((0.0, 1.0), 0.0, (1.0, 1.0), PerturbationSpec::zero(2.0).unwrap());
    let errs: Vec<f64> = [128, 256, 512, 1024]
        .iter()
        .map(|&n| (principal_eigenpair(2.0, &prob, &eig_opts(n)).unwrap().lambda1 - exact).abs())
        .collect();
    let (fast, time) = within(t, Duration::from_secs(10));
    let decreasing = errs.windows(2).all(|e| e[1] < e[0]);
    let ok = (w - 1.3065).abs() < 1e-4 && errs[3] < 1e-3 && decreasing && fast;
    (ok, format!("omega = {w:.6}, error at 1024 cells {:.2e}, errors [{}], {time}", errs[3], sci(&errs)))
}

// 3. Analytic gradients against central differences.
fn criterion_3() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = [0.0f64; 2];
    let cases: Vec<(OperatorSpec<f64>, PerturbationSpec<f64>, usize)> = vec![
        (lap(2.0), PerturbationSpec::superlinear_ar(2.0, 1.5, 1.8, 4.0).unwrap(), 0),
        (OperatorSpec::mean_curvature(2.0).unwrap(), PerturbationSpec::sublinear_example(2.0, 1.5, 2.0, 1.8, 1.4).unwrap(), 0),
        (OperatorSpec::pq_laplace(3.0, 2.0).unwrap(), PerturbationSpec::superlinear_ar(3.0, 1.5, 2.0, 4.0).unwrap(), 0),
        (lap(1.5), PerturbationSpec::sublinear_example(1.5, 1.2, 1.4, 1.3, 1.1).unwrap(), 1),
    ];
    let n = 32;
    for (op, f, slot) in cases {
        let prob = problem((0.0, 1.0), 0.5, (1.0, 0.5), f);
        let mesh = Mesh::shared(0.0, 1.0, n).unwrap();
        let barrier = DiscreteFunction::constant(mesh.clone(), 0.9);
        let aux = AuxCoeffs { c9: 1.3, c10: 0.7, q_exp: prob.p, r_exp: prob.p + 2.0 };
        let eta = prob.default_eta();
        let families = [
            FunctionalSpec::mu(),
            FunctionalSpec::phi_lambda(-0.5, eta),
            FunctionalSpec::trunc_cap(0.3, eta, barrier.clone()),
            FunctionalSpec::trunc_cap(0.3, eta, barrier.clone()).with_aux(aux),
            FunctionalSpec::trunc_floor(0.3, eta, barrier.clone()),
            FunctionalSpec::aux_psi(aux),
            FunctionalSpec::super_psi(-1.0, eta),
            FunctionalSpec::robin_w(0.7, 0.0),
        ];
        for spec in &families {
            for _ in 0..20 {
                let values: Vec<f64> = (0..=n)
                    .map(|_| loop {
                        let x: f64 = rng.gen_range(-0.5..2.5);
                        if [0.0, 0.9, 1.0].iter().all(|k| (x - k).abs() > 1e-3) {
                            break x;
                        }
                    })
                    .collect();
                let u = DiscreteFunction::new(mesh.clone(), values.clone()).unwrap();
                let g = gradient(spec, &op, &prob, &u).unwrap();
                let scale = g.values().iter().map(|x| x.abs()).fold(0.0, f64::max);
                // cells with |Du| < 1e-8 are degenerate for p < 2; skip their nodes
                let degenerate: Vec<bool> = (0..=n)
                    .map(|i| {
                        let left = i > 0 && (values[i] - values[i - 1]).abs() * n as f64 <= 1e-8;
                        let right = i < n && (values[i + 1] - values[i]).abs() * n as f64 <= 1e-8;
                        left || right
                    })
                    .collect();
                for i in 0..=n {
                    if degenerate[i] {
                        continue;
                    }
                    let step = 1e-6 * values[i].abs().max(1.0);
                    let mut up = values.clone();
                    let mut dn = values.clone();
                    up[i] += step;
                    dn[i] -= step;
                    let eu = energy(spec, &op, &prob, &DiscreteFunction::new(mesh.clone(), up).unwrap()).unwrap();
                    let ed = energy(spec, &op, &prob, &DiscreteFunction::new(mesh.clone(), dn).unwrap()).unwrap();
                    let fd = (eu - ed) / (2.0 * step);
                    worst[slot] = worst[slot].max((fd - g.values()[i]).abs() / scale);
                }
            }
        }
    }
    let (fast, time) = within(t, Duration::from_secs(30));
    let ok = worst[0] < 1e-6 && worst[1] < 1e-4 && fast;
    (ok, format!("max relative error {:.1e} (p >= 2), {:.1e} (p < 2), {time}", worst[0], worst[1]))
}

// 4. Auxiliary problem with the constant solution 1.
fn criterion_4() -> Outcome {
    let prob = problem((0.0, 1.0), 1.0, (0.0, 0.0), PerturbationSpec::zero(2.0).unwrap());
    let op = lap(2.0);
    let aux = AuxCoeffs { c9: 2.0, c10: 1.0, q_exp: 2.0, r_exp: 4.0 };
    let p = params(256);
    let out = solve_auxiliary_with(&op, &prob, aux, p.mesh(&prob).unwrap(), &p).unwrap();
    let dist = out.u.as_ref().map(|u| sup_dist(u, 1.0)).unwrap_or(f64::INFINITY);
    let rep = multistart_functional(&FunctionalSpec::aux_psi(aux), &op, &prob, 10, &p).unwrap();
    let ok = out.status == Status::Solution && dist < 1e-7 && rep.cluster_count() == 1;
    (ok, format!("sup |u* - 1| = {dist:.1e}, clusters {} (sizes {:?}, failed {})", rep.cluster_count(), rep.cluster_sizes, rep.failed))
}

fn cubic() -> PerturbationSpec<f64> {
    PerturbationSpec::power_sum(2.0, vec![(2.0, 2.0), (-1.0, 4.0)]).unwrap()
}

// 5. Minimal solution with the constant value 1, above the auxiliary barrier.
fn criterion_5() -> Outcome {
    let prob = problem((0.0, 1.0), 0.0, (0.0, 0.0), cubic());
    let op = lap(2.0);
    let p = params(256);
    let (aux, _) = solve_auxiliary(&op, &prob, -1.0, &p).unwrap();
    let floor = aux.u.unwrap();
    let out = minimal_solution_from(&op, &prob, -1.0, &p, &floor).unwrap();
    let u = out.u.unwrap();
    let dist = sup_dist(&u, 1.0);
    let gap = u.sub(&floor).unwrap().min();
    let ok = out.status == Status::Solution && dist < 1e-7 && gap >= -1e-8;
    (ok, format!("sup |u - 1| = {dist:.1e}, min(u - u*) = {gap:.3e}"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run_cli(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_qrobin"))
        .arg(cmd)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap_or(-1)
}

// 6. Existence threshold equals the principal eigenvalue for a positive sublinear reaction.
fn criterion_6() -> Outcome {
    let t = Instant::now();
    let f = PerturbationSpec::power_sum(2.0, vec![(1.0, 1.1)]).unwrap();
    let class = f.class_flags.sublinear_h1 && f.class_flags.strictly_positive;
    let prob = problem((0.0, 1.0), 0.0, (0.0, 0.0), f);
    let op = lap(2.0);
    let p = params(256);
    let l1 = principal_eigenpair(2.0, &prob, &eig_opts(256)).unwrap().lambda1;
    let star = detect_lambda_star(&op, &prob, (-1.0, 1.0), 1e-2, &p).unwrap();
    let contains = star.lo <= l1 + 1e-8 && star.hi >= l1 - 1e-8;
    let above = minimal_solution(&op, &prob, 0.5, &p).unwrap().status;

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{ "operator": { "kind": "p_laplace", "p": 2.0 },
             "problem": { "interval": [0.0, 1.0], "xi": 0.0, "beta": [0.0, 0.0],
                          "perturbation": { "kind": "power_sum", "terms": [[1.0, 1.1]] } },
             "solver": { "n_cells": 256 },
             "command": { "name": "solve", "lambda": 0.5 } }"#,
    );
    let code = run_cli("solve", &cfg, &dir.path().join("o"), &[]);
    let (fast, time) = within(t, Duration::from_secs(120));
    let ok = class && contains && star.hi - star.lo <= 1e-2 && above == Status::NoSolutionDetected && code == 2 && fast;
    (
        ok,
        format!(
            "interval [{:.5}, {:.5}] vs lambda1 = {l1:.1e}, lambda = 0.5 gives {} (exit {code}), {time}",
            star.lo,
            star.hi,
            above.as_str()
        ),
    )
}

// 7. Strictly increasing branch and left continuity.
fn criterion_7() -> Outcome {
    let f = PerturbationSpec::sublinear_example(2.0, 1.5, 2.0, 1.8, 1.4).unwrap();
    let prob = problem((0.0, 1.0), 0.0, (1.0, 1.0), f);
    let op = lap(2.0);
    let p = params(256);
    let grid = [-3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5];
    let branch = sweep(&op, &prob, &grid, &p).unwrap();
    let all_solved = branch.minimal.iter().all(|o| o.status == Status::Solution);
    let inc = branch.min_increase().unwrap_or(f64::NAN);
    let deltas = [0.1, 0.01, 0.001];
    let lc = check_left_continuity(&op, &prob, -1.0, &deltas, &p).unwrap();
    let lc_ok = lc.nonincreasing && lc.distances[2] < 1e-3;

    // constant Neumann family: positive root of lambda m + 2m - m^3 = 0 is sqrt(lambda + 2)
    let flat = problem((0.0, 1.0), 0.0, (0.0, 0.0), cubic());
    let lcf = check_left_continuity(&op, &flat, -1.0, &deltas, &params(64)).unwrap();
    let m = |l: f64| (l + 2.0).sqrt();
    let oracle_err = deltas
        .iter()
        .zip(&lcf.distances)
        .map(|(d, dist)| (dist - (m(-1.0) - m(-1.0 - d))).abs())
        .fold(0.0, f64::max);
    // sqrt(lambda + 1) would put the level at 0 for lambda = -1 and is undefined below it
    let literal = (-1.0f64 + 1.0).sqrt();
    let ok = all_solved && branch.violations.is_empty() && inc > 0.0 && lc_ok && oracle_err < 1e-6;
    (
        ok,
        format!(
            "min nodal increase {inc:.2e}, distances [{}], constant-family oracle error {oracle_err:.1e} \
             (sqrt(lambda + 1) would give level {literal} at lambda = -1, expected 1)",
            sci(&lc.distances)
        ),
    )
}

fn f1(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x <= 1.0 {
        x.powf(0.5) - 2.0 * x.powf(0.8)
    } else {
        x.powi(3) - 2.0 * x
    }
}

// 8. Second positive solution for a superlinear reaction.
fn criterion_8() -> Outcome {
    let t = Instant::now();
    let f = PerturbationSpec::superlinear_ar(2.0, 1.5, 1.8, 4.0).unwrap();
    let prob = problem((0.0, 10.0), 0.0, (0.0, 0.0), f);
    let op = lap(2.0);
    let p = params(512);
    let low = minimal_solution(&op, &prob, -1.0, &p).unwrap();
    let u_min = match (low.status, low.u) {
        (Status::Solution, Some(u)) => u,
        (s, _) => return (false, format!("no minimal solution ({})", s.as_str())),
    };
    let hi = second_solution(&op, &prob, -1.0, &u_min, &p, &MountainPassParams::default()).unwrap();
    let Some(u_hat) = hi.u.clone() else {
        return (false, format!("second solution missing ({})", hi.status.as_str()));
    };
    let res = residual(&op, &prob, -1.0, &u_hat).unwrap();
    let gap = u_hat.sub(&u_min).unwrap().min();
    let dist = c1_distance(&u_hat, &u_min).unwrap();

    let xi = |_: f64| 0.0;
    let shoot = ShootingProblem { p: 2.0, interval: (0.0, 10.0), beta: (0.0, 0.0), lambda: -1.0, xi: &xi, f: &f1, steps: 20_000 };
    let roots = shoot.positive_solutions(1e-3, 5.0, 600);
    let (fast, time) = within(t, Duration::from_secs(300));
    let ok = hi.status == Status::Solution && res < 1e-6 && gap >= -1e-9 && dist > 1e-3 && roots.len() >= 2 && fast;
    (
        ok,
        format!(
            "residual {res:.1e}, min(u2 - u1) = {gap:.1e}, C1 distance {dist:.3}, shooting finds {} positive solutions \
             (u(0) in {:.4?}), {time}",
            roots.len(),
            roots
        ),
    )
}

// 9. Picone defect.
fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut self_defect = 0.0f64;
    let mut min_defect = f64::INFINITY;
    for pp in [2.0, 3.0] {
        let prob = ProblemSpec::new((0.0, 1.0), XiSpec::Nodes(vec![1.0, -0.5, 2.0]), (1.0, 2.0), PerturbationSpec::zero(pp).unwrap(), pp).unwrap();
        let op = lap(pp);
        let res = principal_eigenpair(pp, &prob, &eig_opts(256)).unwrap();
        self_defect = self_defect.max(picone_defect(&res, &res.u1, &op, &prob).unwrap().abs());
        for _ in 0..20 {
            let u = random_positive(res.u1.mesh(), &mut rng);
            min_defect = min_defect.min(picone_defect(&res, &u, &op, &prob).unwrap());
        }
    }
    let ok = self_defect < 1e-9 && min_defect >= -1e-8;
    (ok, format!("|R(u1, u1)| = {self_defect:.1e}, smallest defect over 40 random functions {min_defect:.3e}"))
}

// 10. Uniqueness class: one cluster from ten starts.
fn criterion_10() -> Outcome {
    let f = PerturbationSpec::power_sum(2.0, vec![(1.0, 1.5)]).unwrap();
    let class = f.class_flags.unique_h1pp;
    let prob = problem((0.0, 1.0), 0.0, (0.0, 0.0), f);
    let l1 = principal_eigenpair(2.0, &prob, &eig_opts(256)).unwrap().lambda1;
    let rep = multistart_uniqueness(&lap(2.0), &prob, l1 - 1.0, 10, &params(256)).unwrap();
    let ok = class && rep.class_guaranteed && rep.cluster_count() == 1 && rep.failed == 0;
    (ok, format!("lambda = {:.3}, clusters {} (sizes {:?}, failed {})", l1 - 1.0, rep.cluster_count(), rep.cluster_sizes, rep.failed))
}

// 11. Convexity in u^q.
fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = f64::NEG_INFINITY;
    for pp in [2.0, 3.0] {
        let prob = problem((0.0, 1.0), 1.0, (1.0, 0.5), PerturbationSpec::zero(pp).unwrap());
        let op = lap(pp);
        let mesh = Mesh::shared(0.0, 1.0, 128).unwrap();
        for _ in 0..20 {
            let probe = DiazSaaProbe { u1: random_positive(&mesh, &mut rng), u2: random_positive(&mesh, &mut rng), samples: 21, q_convexity: pp };
            worst = worst.max(diaz_saa_convexity(&probe, &op, &prob).unwrap().max_violation);
        }
    }
    (worst <= 1e-8, format!("largest chord violation {worst:.1e} over 40 pairs (p = q = 2, 3)"))
}

// 12. Byte-identical artifacts from repeated runs.
fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let head = |f: &str, xi: &str, beta: &str, interval: &str| {
        format!(
            r#""operator": {{ "kind": "p_laplace", "p": 2.0 }},
               "problem": {{ "interval": {interval}, "xi": {xi}, "beta": {beta}, "perturbation": {f} }},
               "solver": {{ "n_cells": 64 }},"#
        )
    };
    let sub = head(r#"{ "kind": "sublinear_example", "tau": 1.5, "q": 2.0, "r": 1.8, "s": 1.4 }"#, "0.0", "[1.0, 1.0]", "[0.0, 1.0]");
    let sup = head(r#"{ "kind": "superlinear_ar", "tau": 1.5, "theta": 1.8, "r": 4.0 }"#, "0.0", "[0.0, 0.0]", "[0.0, 10.0]");
    let commands = [
        ("hypcheck", format!(r#"{{ {sub} "command": {{ "name": "hypcheck" }} }}"#)),
        ("eigen", format!(r#"{{ {sub} "command": {{ "name": "eigen", "simplicity_starts": 5 }} }}"#)),
        ("solve", format!(r#"{{ {sub} "command": {{ "name": "solve", "lambda": -1.0, "multistart": 4 }} }}"#)),
        ("second", format!(r#"{{ {sup} "command": {{ "name": "second", "lambda": -1.0 }} }}"#)),
        ("sweep", format!(r#"{{ {sub} "command": {{ "name": "sweep", "lambdas": [-2.0, -1.0, 0.0], "second": false }} }}"#)),
        ("lambda-star", format!(r#"{{ {sub} "command": {{ "name": "lambda-star", "bracket": [0.0, 4.0], "tol_lambda": 0.25 }} }}"#)),
        ("verify", format!(r#"{{ {sub} "command": {{ "name": "verify", "profile": "solve-a/solve.csv", "lambda": -1.0 }} }}"#)),
    ];
    let mut mismatched = Vec::new();
    let mut files = 0;
    let mut codes = Vec::new();
    for (cmd, body) in &commands {
        let cfg = write_config(d, &format!("{cmd}.json"), body);
        let a = d.join(format!("{cmd}-a"));
        let b = d.join(format!("{cmd}-b"));
        let ca = run_cli(cmd, &cfg, &a, &["--threads", "1"]);
        let cb = run_cli(cmd, &cfg, &b, &["--threads", "3", "--seed", "42"]);
        codes.push(ca);
        if ca != cb {
            mismatched.push(format!("{cmd}: exit {ca} vs {cb}"));
        }
        let mut names: Vec<_> = std::fs::read_dir(&a).map(|r| r.flatten().map(|e| e.file_name()).collect()).unwrap_or_default();
        names.sort();
        if names.is_empty() {
            mismatched.push(format!("{cmd}: no output"));
        }
        for name in names {
            files += 1;
            let x = std::fs::read(a.join(&name)).unwrap();
            match std::fs::read(b.join(&name)) {
                Ok(y) if x == y => {}
                _ => mismatched.push(format!("{cmd}/{}", name.to_string_lossy())),
            }
        }
    }
    let ok = mismatched.is_empty() && codes.iter().all(|c| *c == 0);
    (ok, format!("{files} files from 7 commands compared, exit codes {codes:?}, mismatches {mismatched:?}"))
}

#[test]
fn acceptance() {
    let criteria: [(u32, fn() -> Outcome); 12] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
        (12, criterion_12),
    ];
    let mut failed = Vec::new();
    for (k, check) in criteria {
        let (ok, detail) = check();
        println!("criterion {k:>2}: {} | {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(k);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
