use std::path::Path;

use qrobin::{
    HypothesisGrid, MountainPassParams, OperatorSpec, PerturbationSpec, ProblemSpec, SolverParams, XiSpec,
};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub operator: OperatorBlock,
    pub problem: ProblemBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    pub command: CommandBlock,
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorName {
    PLaplace,
    PqLaplace,
    MeanCurvature,
    Perturbed,
    Tabulated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorBlock {
    pub kind: OperatorName,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Breakpoints and values of a tabulated `a0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_convexity: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum XiBlock {
    Const(f64),
    /// Values at equispaced nodes, interpolated linearly.
    Nodes(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationName {
    Zero,
    SublinearExample,
    SuperlinearAr,
    SuperlinearNonAr,
    PowerSum,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationBlock {
    pub kind: PerturbationName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// `[coefficient, exponent]` pairs of `sum k x^{e-1}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub interval: [f64; 2],
    pub xi: XiBlock,
    pub beta: [f64; 2],
    pub perturbation: PerturbationBlock,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_grad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MountainBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deform_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descent_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilt: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CommandBlock {
    Hypcheck {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<Vec<f64>>,
    },
    Eigen {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_iters: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        simplicity_starts: Option<usize>,
    },
    Solve {
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        multistart: Option<usize>,
    },
    Second {
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mountain: Option<MountainBlock>,
    },
    Sweep {
        lambdas: Vec<f64>,
        #[serde(default)]
        second: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mountain: Option<MountainBlock>,
    },
    LambdaStar {
        bracket: [f64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol_lambda: Option<f64>,
    },
    Verify {
        /// CSV profile (`z,u[,du]`), relative to the config file.
        profile: String,
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        barrier: Option<String>,
    },
}

impl CommandBlock {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Hypcheck { .. } => "hypcheck",
            Self::Eigen { .. } => "eigen",
            Self::Solve { .. } => "solve",
            Self::Second { .. } => "second",
            Self::Sweep { .. } => "sweep",
            Self::LambdaStar { .. } => "lambda-star",
            Self::Verify { .. } => "verify",
        }
    }
}

/// A rejected configuration; maps to exit code 4.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<qrobin::Error> for ConfigError {
    fn from(e: qrobin::Error) -> Self {
        Self(e.to_string())
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

fn need(v: Option<f64>, kind: &str, field: &str) -> Result<f64> {
    v.ok_or_else(|| ConfigError(format!("perturbation `{kind}` needs `{field}`")))
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.solver.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn operator(&self) -> Result<OperatorSpec<f64>> {
        let o = &self.operator;
        let extra = |name: &str, present: bool| if present { bad(format!("operator `{:?}` does not take `{name}`", o.kind)) } else { Ok(()) };
        let spec = match o.kind {
            OperatorName::PqLaplace => {
                extra("t", o.t.is_some())?;
                extra("a0", o.a0.is_some())?;
                let q = o.q.ok_or_else(|| ConfigError("operator `pq_laplace` needs `q`".into()))?;
                OperatorSpec::pq_laplace(o.p, q)?
            }
            OperatorName::Tabulated => {
                extra("q", o.q.is_some())?;
                match (&o.t, &o.a0) {
                    (Some(t), Some(a0)) => OperatorSpec::tabulated(o.p, t.clone(), a0.clone())?,
                    _ => return bad("operator `tabulated` needs `t` and `a0`"),
                }
            }
            kind => {
                extra("q", o.q.is_some())?;
                extra("t", o.t.is_some())?;
                extra("a0", o.a0.is_some())?;
                match kind {
                    OperatorName::PLaplace => OperatorSpec::p_laplace(o.p)?,
                    OperatorName::MeanCurvature => OperatorSpec::mean_curvature(o.p)?,
                    _ => OperatorSpec::perturbed(o.p)?,
                }
            }
        };
        Ok(match o.q_convexity {
            Some(q) => spec.with_q_convexity(q)?,
            None => spec,
        })
    }

    pub fn perturbation(&self) -> Result<PerturbationSpec<f64>> {
        let b = &self.problem.perturbation;
        let p = self.operator.p;
        let allowed: &[&str] = match b.kind {
            PerturbationName::Zero => &[],
            PerturbationName::SublinearExample => &["tau", "q", "r", "s"],
            PerturbationName::SuperlinearAr => &["tau", "theta", "r"],
            PerturbationName::SuperlinearNonAr => &["tau", "theta"],
            PerturbationName::PowerSum => &["terms"],
        };
        let present = [
            ("tau", b.tau.is_some()),
            ("q", b.q.is_some()),
            ("r", b.r.is_some()),
            ("s", b.s.is_some()),
            ("theta", b.theta.is_some()),
            ("terms", b.terms.is_some()),
        ];
        if let Some((name, _)) = present.iter().find(|(n, here)| *here && !allowed.contains(n)) {
            return bad(format!("perturbation `{:?}` does not take `{name}`", b.kind));
        }
        let k = format!("{:?}", b.kind);
        Ok(match b.kind {
            PerturbationName::Zero => PerturbationSpec::zero(p)?,
            PerturbationName::SublinearExample => PerturbationSpec::sublinear_example(
                p,
                need(b.tau, &k, "tau")?,
                need(b.q, &k, "q")?,
                need(b.r, &k, "r")?,
                need(b.s, &k, "s")?,
            )?,
            PerturbationName::SuperlinearAr => {
                PerturbationSpec::superlinear_ar(p, need(b.tau, &k, "tau")?, need(b.theta, &k, "theta")?, need(b.r, &k, "r")?)?
            }
            PerturbationName::SuperlinearNonAr => {
                PerturbationSpec::superlinear_non_ar(p, need(b.tau, &k, "tau")?, need(b.theta, &k, "theta")?)?
            }
            PerturbationName::PowerSum => {
                let terms = b.terms.as_ref().ok_or_else(|| ConfigError("perturbation `PowerSum` needs `terms`".into()))?;
                PerturbationSpec::power_sum(p, terms.iter().map(|t| (t[0], t[1])).collect())?
            }
        })
    }

    pub fn problem(&self) -> Result<ProblemSpec<f64>> {
        let pb = &self.problem;
        if pb.beta.iter().any(|b| !(*b >= 0.0)) {
            return bad(format!("beta = {:?} must be nonnegative", pb.beta));
        }
        let xi = match &pb.xi {
            XiBlock::Const(v) => XiSpec::Const(*v),
            XiBlock::Nodes(v) => XiSpec::Nodes(v.clone()),
        };
        Ok(ProblemSpec::new((pb.interval[0], pb.interval[1]), xi, (pb.beta[0], pb.beta[1]), self.perturbation()?, self.operator.p)?)
    }

    pub fn solver(&self) -> SolverParams<f64> {
        let s = &self.solver;
        let d = SolverParams::<f64>::default();
        SolverParams {
            n_cells: s.n_cells.unwrap_or(d.n_cells),
            tol_grad: s.tol_grad.unwrap_or(d.tol_grad),
            max_iters: s.max_iters.unwrap_or(d.max_iters),
            eta_shift: s.eta_shift,
            xi_hat: s.xi_hat,
            divergence_norm: s.divergence_norm.unwrap_or(d.divergence_norm),
            seed: self.seed(),
            aux_r: s.aux_r,
        }
    }

    /// Cross-field checks that do not need a solver run.
    pub fn validate(&self) -> Result<()> {
        let op = self.operator()?;
        let prob = self.problem()?;
        if op.p != prob.p {
            return bad("operator and problem exponents differ");
        }
        self.solver().validate(&prob)?;
        match &self.command {
            CommandBlock::Hypcheck { grid: Some(g) } => {
                HypothesisGrid::new(g.clone())?;
            }
            CommandBlock::Eigen { r, tol, simplicity_starts, .. } => {
                if let Some(r) = r {
                    if !(*r > 1.0) {
                        return bad(format!("eigen exponent r = {r} must exceed 1"));
                    }
                }
                if let Some(t) = tol {
                    if !(*t > 0.0) {
                        return bad("eigen tol must be positive");
                    }
                }
                if let Some(n) = simplicity_starts {
                    if *n < 5 {
                        return bad(format!("simplicity_starts = {n} must be at least 5"));
                    }
                }
            }
            CommandBlock::Solve { lambda, multistart } => {
                finite("lambda", *lambda)?;
                if *multistart == Some(0) {
                    return bad("multistart needs at least one start");
                }
            }
            CommandBlock::Second { lambda, .. } => finite("lambda", *lambda)?,
            CommandBlock::Sweep { lambdas, .. } => {
                if lambdas.is_empty() {
                    return bad("sweep needs at least one lambda");
                }
                if lambdas.iter().any(|l| !l.is_finite()) || lambdas.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("sweep lambdas must be finite and strictly ascending");
                }
            }
            CommandBlock::LambdaStar { bracket, tol_lambda } => {
                if !(bracket[0] < bracket[1]) {
                    return bad(format!("bracket {bracket:?} must satisfy lo < hi"));
                }
                if let Some(t) = tol_lambda {
                    if !(*t > 0.0) {
                        return bad("tol_lambda must be positive");
                    }
                }
            }
            CommandBlock::Verify { lambda, .. } => finite("lambda", *lambda)?,
            _ => {}
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, with the effective seed filled in.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut canon = self.clone();
        canon.solver.seed = Some(self.seed());
        canon.output = None;
        let bytes = serde_json::to_vec(&canon).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        bad(format!("{name} must be finite"))
    }
}

pub fn mountain(block: &Option<MountainBlock>) -> MountainPassParams<f64> {
    let d = MountainPassParams::<f64>::default();
    let b = block.clone().unwrap_or_default();
    MountainPassParams {
        path_points: b.path_points.unwrap_or(d.path_points),
        endpoint_scale: b.endpoint_scale.unwrap_or(d.endpoint_scale),
        deform_steps: b.deform_steps.unwrap_or(d.deform_steps),
        descent_tol: b.descent_tol.unwrap_or(d.descent_tol),
        tilt: b.tilt.unwrap_or(d.tilt),
    }
}
