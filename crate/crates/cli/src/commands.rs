use std::path::Path;

use qrobin::{
    c1_distance, check_hypotheses, check_simplicity, cone_check, detect_lambda_star, minimal_solution,
    multistart_uniqueness, picone_defect, principal_eigenpair_on, residual, second_solution, solve_auxiliary,
    sweep_with_second, ConeStatus, DiscreteFunction, EigenOptions, HypothesisGrid, OperatorSpec, ProblemSpec,
    SolveOutcome, SolverParams, Status,
};
use serde_json::{json, Value};

use crate::config::{mountain, CommandBlock, ConfigError, RunConfig};
use crate::output::{jnum, num, Writer};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    NoSolution = 2,
    AuditFailed = 3,
    Config = 4,
    NoConvergence = 5,
}

impl From<Status> for Exit {
    fn from(s: Status) -> Self {
        match s {
            Status::Solution => Exit::Ok,
            Status::NoSolutionDetected => Exit::NoSolution,
            Status::NoConvergence => Exit::NoConvergence,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure { exit: Exit::Config, message: e.0 }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { exit: Exit::Config, message: format!("cannot write output: {e}") }
    }
}

impl From<qrobin::Error> for Failure {
    fn from(e: qrobin::Error) -> Self {
        use qrobin::Error as E;
        let exit = match &e {
            E::InvalidParameter(_)
            | E::Grid(_)
            | E::BarrierMissing
            | E::MeshMismatch
            | E::NotPLaplace
            | E::Precondition(_)
            | E::XiHatNotFound { .. } => Exit::Config,
            E::Bracket(_) => Exit::NoSolution,
            _ => Exit::NoConvergence,
        };
        Failure { exit, message: e.to_string() }
    }
}

type Result<T> = std::result::Result<T, Failure>;

struct Ctx<'a> {
    op: OperatorSpec<f64>,
    prob: ProblemSpec<f64>,
    params: SolverParams<f64>,
    base_dir: &'a Path,
}

pub fn run(cfg: &RunConfig, base_dir: &Path, out: &mut Writer) -> Result<Exit> {
    cfg.validate()?;
    let ctx = Ctx { op: cfg.operator()?, prob: cfg.problem()?, params: cfg.solver(), base_dir };
    match &cfg.command {
        CommandBlock::Hypcheck { grid } => hypcheck(&ctx, grid.as_deref(), out),
        CommandBlock::Eigen { r, tol, max_iters, simplicity_starts } => eigen(&ctx, *r, *tol, *max_iters, *simplicity_starts, out),
        CommandBlock::Solve { lambda, multistart } => solve(&ctx, *lambda, *multistart, out),
        CommandBlock::Second { lambda, mountain: mp } => second(&ctx, *lambda, &mountain(mp), out),
        CommandBlock::Sweep { lambdas, second, mountain: mp } => sweep(&ctx, lambdas, second.then(|| mountain(mp)), out),
        CommandBlock::LambdaStar { bracket, tol_lambda } => lambda_star(&ctx, *bracket, tol_lambda.unwrap_or(1e-2), out),
        CommandBlock::Verify { profile, lambda, barrier } => verify(&ctx, profile, *lambda, barrier.as_deref(), out),
    }
}

fn hypcheck(ctx: &Ctx, grid: Option<&[f64]>, out: &mut Writer) -> Result<Exit> {
    let grid = match grid {
        Some(g) => HypothesisGrid::new(g.to_vec())?,
        None => HypothesisGrid::default(),
    };
    let report = check_hypotheses(&ctx.op, &grid)?;
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| json!({ "name": c.name, "passed": c.passed, "max_violation": jnum(c.max_violation) }))
        .collect();
    let flags = ctx.prob.flags();
    out.json(
        "hypcheck.json",
        json!({
            "checks": checks,
            "c5": jnum(report.c5),
            "max_abs_pg_gap": jnum(report.max_abs_pg_gap),
            "all_passed": report.all_passed,
            "reaction_class": {
                "sublinear": flags.sublinear_h1,
                "strictly_positive": flags.strictly_positive,
                "superlinear": flags.superlinear_h2,
                "unique": flags.unique_h1pp,
                "ambrosetti_rabinowitz": flags.ambrosetti_rabinowitz,
            },
        }),
    )?;
    Ok(if report.all_passed { Exit::Ok } else { Exit::AuditFailed })
}

fn eigen_opts(ctx: &Ctx) -> EigenOptions<f64> {
    EigenOptions { n_cells: ctx.params.n_cells, seed: ctx.params.seed, ..EigenOptions::default() }
}

fn eigen(
    ctx: &Ctx,
    r: Option<f64>,
    tol: Option<f64>,
    max_iters: Option<usize>,
    simplicity_starts: Option<usize>,
    out: &mut Writer,
) -> Result<Exit> {
    let r = r.unwrap_or(ctx.prob.p);
    let base = eigen_opts(ctx);
    let opts = EigenOptions { tol: tol.unwrap_or(base.tol), max_iters: max_iters.unwrap_or(base.max_iters), ..base };
    let res = principal_eigenpair_on(r, &ctx.prob, ctx.params.mesh(&ctx.prob)?, &opts)?;
    let simplicity = match simplicity_starts {
        Some(n) => {
            let s = check_simplicity(&res, &ctx.prob, r, n, &opts)?;
            json!({
                "starts": s.starts,
                "failures": s.failures,
                "max_c1_distance": jnum(s.max_c1_distance),
                "lambda_spread": jnum(s.lambda_spread),
            })
        }
        None => Value::Null,
    };
    out.json(
        "eigen.json",
        json!({
            "r": r,
            "n_cells": opts.n_cells,
            "lambda1": jnum(res.lambda1),
            "iterations": res.iterations,
            "residual": jnum(res.residual),
            "simplicity": simplicity,
        }),
    )?;
    out.profile("eigen.csv", &res.u1)?;
    Ok(Exit::Ok)
}

fn outcome_json(o: &SolveOutcome<f64>) -> Value {
    json!({
        "status": o.status.as_str(),
        "residual": jnum(o.residual),
        "energy": jnum(o.energy_value),
        "iterations": o.iterations,
        "max": o.u.as_ref().map(|u| jnum(u.max())),
        "min": o.u.as_ref().map(|u| jnum(u.min())),
    })
}

fn trace_rows(o: &SolveOutcome<f64>) -> Vec<Vec<Option<String>>> {
    o.energy_trace.iter().enumerate().map(|(k, e)| vec![Some(k.to_string()), num(*e)]).collect()
}

fn solve(ctx: &Ctx, lambda: f64, multistart: Option<usize>, out: &mut Writer) -> Result<Exit> {
    let o = minimal_solution(&ctx.op, &ctx.prob, lambda, &ctx.params)?;
    let uniqueness = match multistart {
        Some(n) if o.status == Status::Solution => {
            let rep = multistart_uniqueness(&ctx.op, &ctx.prob, lambda, n, &ctx.params)?;
            json!({
                "starts": rep.starts,
                "clusters": rep.cluster_count(),
                "cluster_sizes": rep.cluster_sizes,
                "failed": rep.failed,
                "class_guaranteed": rep.class_guaranteed,
            })
        }
        _ => Value::Null,
    };
    let mut body = outcome_json(&o);
    body["lambda"] = json!(lambda);
    body["multistart"] = uniqueness;
    out.json("solve.json", body)?;
    if let Some(u) = &o.u {
        out.profile("solve.csv", u)?;
    }
    out.table("solve_trace.csv", &["k", "energy"], &trace_rows(&o))?;
    Ok(o.status.into())
}

fn second(ctx: &Ctx, lambda: f64, mp: &qrobin::MountainPassParams<f64>, out: &mut Writer) -> Result<Exit> {
    let low = minimal_solution(&ctx.op, &ctx.prob, lambda, &ctx.params)?;
    let u_min = match (&low.status, &low.u) {
        (Status::Solution, Some(u)) => u.clone(),
        _ => {
            out.json("second.json", json!({ "lambda": lambda, "minimal": outcome_json(&low), "second": Value::Null }))?;
            return Ok(low.status.into());
        }
    };
    let hi = second_solution(&ctx.op, &ctx.prob, lambda, &u_min, &ctx.params, mp)?;
    let (distance, gap) = match &hi.u {
        Some(u) => (jnum(c1_distance(u, &u_min)?), jnum(u.sub(&u_min)?.min())),
        None => (Value::Null, Value::Null),
    };
    out.json(
        "second.json",
        json!({
            "lambda": lambda,
            "minimal": outcome_json(&low),
            "second": outcome_json(&hi),
            "c1_distance": distance,
            "min_gap": gap,
        }),
    )?;
    out.profile("second_minimal.csv", &u_min)?;
    if let Some(u) = &hi.u {
        out.profile("second.csv", u)?;
    }
    Ok(hi.status.into())
}

fn sweep(ctx: &Ctx, lambdas: &[f64], mp: Option<qrobin::MountainPassParams<f64>>, out: &mut Writer) -> Result<Exit> {
    let branch = sweep_with_second(&ctx.op, &ctx.prob, lambdas, &ctx.params, mp.as_ref())?;
    let mut columns = vec!["lambda", "status", "max", "min", "residual", "energy"];
    if branch.second.is_some() {
        columns.extend(["second_status", "second_max", "second_energy"]);
    }
    let mut rows = Vec::new();
    for (k, (l, o)) in lambdas.iter().zip(&branch.minimal).enumerate() {
        let mut row = vec![
            num(*l),
            Some(o.status.as_str().to_string()),
            o.u.as_ref().and_then(|u| num(u.max())),
            o.u.as_ref().and_then(|u| num(u.min())),
            num(o.residual),
            num(o.energy_value),
        ];
        if let Some(sec) = &branch.second {
            match &sec[k] {
                Some(s) => row.extend([
                    Some(s.status.as_str().to_string()),
                    s.u.as_ref().and_then(|u| num(u.max())),
                    num(s.energy_value),
                ]),
                None => row.extend([None, None, None]),
            }
        }
        rows.push(row);
    }
    out.table("sweep.csv", &columns, &rows)?;

    let mesh = ctx.params.mesh(&ctx.prob)?;
    let names: Vec<String> = lambdas.iter().map(|l| format!("u@{l}")).collect();
    let mut cols: Vec<&str> = vec!["z"];
    cols.extend(names.iter().map(String::as_str));
    let profiles: Vec<Vec<Option<String>>> = (0..mesh.n_nodes())
        .map(|i| {
            let mut row = vec![num(mesh.node(i))];
            row.extend(branch.minimal.iter().map(|o| match (&o.status, &o.u) {
                (Status::Solution, Some(u)) => num(u.values()[i]),
                _ => None,
            }));
            row
        })
        .collect();
    out.table("sweep_profiles.csv", &cols, &profiles)?;

    out.json(
        "sweep.json",
        json!({
            "lambdas": lambdas,
            "status": branch.minimal.iter().map(|o| o.status.as_str()).collect::<Vec<_>>(),
            "lambda_star_estimate": branch.lambda_star_estimate.map(|(a, b)| [a, b]),
            "lambda1": branch.eigen_ref.as_ref().map(|e| jnum(e.lambda1)),
            "min_increase": branch.min_increase().map(jnum),
            "violations": branch.violations,
            "notes": branch.notes,
        }),
    )?;
    Ok(if branch.minimal.iter().any(|o| o.status == Status::NoConvergence) { Exit::NoConvergence } else { Exit::Ok })
}

fn lambda_star(ctx: &Ctx, bracket: [f64; 2], tol: f64, out: &mut Writer) -> Result<Exit> {
    let star = detect_lambda_star(&ctx.op, &ctx.prob, (bracket[0], bracket[1]), tol, &ctx.params)?;
    let lambda1 = principal_eigenpair_on(ctx.prob.p, &ctx.prob, ctx.params.mesh(&ctx.prob)?, &eigen_opts(ctx)).ok();
    out.json(
        "lambda_star.json",
        json!({
            "lo": star.lo,
            "hi": star.hi,
            "tol_lambda": tol,
            "evaluations": star.evaluations,
            "lambda1": lambda1.map(|e| jnum(e.lambda1)),
        }),
    )?;
    Ok(Exit::Ok)
}

fn read_profile(ctx: &Ctx, rel: &str) -> Result<DiscreteFunction<f64>> {
    let path = ctx.base_dir.join(rel);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure { exit: Exit::Config, message: format!("cannot read {}: {e}", path.display()) })?;
    let u = qrobin::mesh::from_csv::<f64>(&text)?;
    let (a, b) = u.mesh().interval();
    let (pa, pb) = ctx.prob.interval;
    let tol = 1e-9 * (pb - pa);
    if (a - pa).abs() > tol || (b - pb).abs() > tol {
        return Err(Failure {
            exit: Exit::Config,
            message: format!("profile {} lives on ({a}, {b}), problem on ({pa}, {pb})", path.display()),
        });
    }
    Ok(u)
}

/// Residual, cone, barrier and Picone audit of a stored profile.
fn verify(ctx: &Ctx, profile: &str, lambda: f64, barrier: Option<&str>, out: &mut Writer) -> Result<Exit> {
    let u = read_profile(ctx, profile)?;
    // reuse the stored mesh; the profile's nodes must coincide with the problem mesh
    let u = DiscreteFunction::new(qrobin::Mesh::shared(ctx.prob.interval.0, ctx.prob.interval.1, u.mesh().n_cells())?, u.into_values())?;
    let params = SolverParams { n_cells: u.mesh().n_cells(), ..ctx.params.clone() };
    let tol = params.tol_grad * u.max_abs().max(1.0);

    let res = residual(&ctx.op, &ctx.prob, lambda, &u)?;
    let cone = cone_check(&u, qrobin::solve::CONE_TOL);

    let floor = match barrier {
        Some(rel) => Some(read_profile(ctx, rel)?),
        None => solve_auxiliary(&ctx.op, &ctx.prob, lambda, &params).ok().and_then(|(o, _)| o.u),
    };
    let gap = match &floor {
        Some(f) => Some(u.sub(&DiscreteFunction::new(u.mesh().clone(), f.values().to_vec())?)?.min()),
        None => None,
    };

    let picone = if ctx.op.is_p_laplace() && cone == ConeStatus::InDPlus {
        let eig = principal_eigenpair_on(ctx.prob.p, &ctx.prob, u.mesh().clone(), &eigen_opts(ctx))?;
        let defect = picone_defect(&eig, &u, &ctx.op, &ctx.prob)?;
        // a positive solution with f > 0 forces lambda < lambda1
        let consistent = !(ctx.prob.flags().strictly_positive && lambda >= eig.lambda1);
        Some((defect, eig.lambda1, consistent))
    } else {
        None
    };

    let residual_ok = res < tol;
    let cone_ok = cone == ConeStatus::InDPlus;
    let barrier_ok = gap.map(|g| g >= -1e-8);
    let picone_ok = picone.map(|(d, _, consistent)| d >= -1e-8 && consistent);
    let passed = residual_ok && cone_ok && barrier_ok.unwrap_or(true) && picone_ok.unwrap_or(true);
    out.json(
        "verify.json",
        json!({
            "lambda": lambda,
            "n_cells": u.mesh().n_cells(),
            "residual": { "value": jnum(res), "tol": tol, "passed": residual_ok },
            "cone": { "status": format!("{cone:?}"), "passed": cone_ok },
            "barrier": { "min_gap": gap.map(jnum), "passed": barrier_ok },
            "picone": picone.map(|(d, l1, c)| json!({
                "defect": jnum(d),
                "lambda1": jnum(l1),
                "consistent_with_lambda": c,
                "passed": picone_ok,
            })),
            "passed": passed,
        }),
    )?;
    Ok(if passed { Exit::Ok } else { Exit::AuditFailed })
}
