//! Batch front end: `qrobin <command> --config run.json [--out DIR] [--threads N] [--seed N]`.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Exit, Failure};
use output::{Header, Writer};

#[derive(Parser, Debug)]
#[command(name = "qrobin", version, about = "Positive solutions of 1-D quasilinear Robin problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Audit the operator hypotheses on a grid.
    Hypcheck(Flags),
    /// Principal eigenpair.
    Eigen(Flags),
    /// Minimal positive solution at one lambda.
    Solve(Flags),
    /// Minimal solution plus a mountain-pass second solution.
    Second(Flags),
    /// Minimal-solution branch over a lambda grid.
    Sweep(Flags),
    /// Bisection for the existence threshold.
    LambdaStar(Flags),
    /// Audit a stored profile.
    Verify(Flags),
}

#[derive(clap::Args, Debug)]
struct Flags {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (default: the config's `output`, else `out`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and multistart (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config seed (default 42).
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Flags) {
        match self {
            Command::Hypcheck(f) => ("hypcheck", f),
            Command::Eigen(f) => ("eigen", f),
            Command::Solve(f) => ("solve", f),
            Command::Second(f) => ("second", f),
            Command::Sweep(f) => ("sweep", f),
            Command::LambdaStar(f) => ("lambda-star", f),
            Command::Verify(f) => ("verify", f),
        }
    }
}

fn execute(cli: Cli) -> Result<Exit, Failure> {
    let (name, flags) = cli.command.parts();
    let mut cfg = config::load(&flags.config)?;
    if cfg.command.name() != name {
        return Err(config::ConfigError(format!(
            "command `{name}` requested but the config describes `{}`",
            cfg.command.name()
        ))
        .into());
    }
    if let Some(seed) = flags.seed {
        cfg.solver.seed = Some(seed);
    }
    if let Some(n) = flags.threads {
        if n == 0 {
            return Err(config::ConfigError("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config::ConfigError(format!("thread pool: {e}")))?;
    }
    let out_dir = match (&flags.out, &cfg.output) {
        (Some(p), _) => p.clone(),
        (None, Some(o)) => PathBuf::from(o),
        (None, None) => PathBuf::from("out"),
    };
    let base_dir = flags.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let header = Header { command: cfg.command.name(), config_sha256: cfg.hash(), seed: cfg.seed() };
    cfg.validate()?;
    let mut writer = Writer::new(&out_dir, header)?;
    let exit = commands::run(&cfg, &base_dir, &mut writer)?;
    for path in &writer.written {
        eprintln!("wrote {}", path.display());
    }
    Ok(exit)
}

fn main() -> ExitCode {
    // clap's own usage errors exit with 2, which is taken by "no solution"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Exit::Config as u8 } else { 0 });
        }
    };
    let exit = match execute(cli) {
        Ok(exit) => exit,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.exit
        }
    };
    match exit {
        Exit::Ok => {}
        Exit::NoSolution => eprintln!("no positive solution detected"),
        Exit::AuditFailed => eprintln!("audit failed"),
        Exit::NoConvergence => eprintln!("solver did not converge"),
        Exit::Config => {}
    }
    ExitCode::from(exit as u8)
}
