use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use hypokin_cli::{run, validate, ExperimentConfig, Kind, RunOptions};
use serde_json::json;

/// Numerical laboratory for kinetic Fokker-Planck equations with rough coefficients.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel mass, residual, semigroup and split-kernel checks.
    KernelCheck(Common),
    /// Solve ensemble members and write the grids.
    Solve(Common),
    /// Solve one member, keep its grid and run every check on it.
    Verify(Common),
    /// Run every check on each ensemble member.
    Ensemble {
        #[command(flatten)]
        common: Common,
        /// Calibrate on the seeds first, write the calibration here and judge with it.
        #[arg(long, value_name = "PATH")]
        calibrate: Option<PathBuf>,
    },
    /// Print the explicit constants of the De Giorgi argument.
    Constants(Common),
    /// The travelling indicator with the time gap removed.
    Counterexample(Common),
    /// Grid-refinement studies of the solver.
    Convergence(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "HYPOKIN_OUT", value_name = "DIR")]
    out: Option<PathBuf>,
    /// Inclusive seed range, e.g. `1..20`.
    #[arg(long, value_name = "A..B", value_parser = parse_seeds)]
    seeds: Option<SeedRange>,
    /// Fail the run if any member's solve fails.
    #[arg(long)]
    strict: bool,
    /// Worker threads.
    #[arg(long, env = "HYPOKIN_THREADS")]
    threads: Option<usize>,
}

#[derive(Clone)]
struct SeedRange(Vec<u64>);

fn parse_seeds(s: &str) -> Result<SeedRange, String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a: u64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok(SeedRange((a..=b).collect()))
}

fn fail(kind: &str, body: serde_json::Value) -> ExitCode {
    let mut obj = json!({ "error": kind });
    if let (Some(o), Some(b)) = (obj.as_object_mut(), body.as_object()) {
        o.extend(b.clone());
    }
    eprintln!("{obj}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common, calibrate) = match cli.command {
        Command::KernelCheck(c) => (Kind::KernelCheck, c, None),
        Command::Solve(c) => (Kind::Solve, c, None),
        Command::Verify(c) => (Kind::Verify, c, None),
        Command::Ensemble { common, calibrate } => (Kind::Ensemble, common, calibrate),
        Command::Constants(c) => (Kind::Constants, c, None),
        Command::Counterexample(c) => (Kind::Counterexample, c, None),
        Command::Convergence(c) => (Kind::Convergence, c, None),
    };

    let mut cfg = match &common.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => return fail("unreadable configuration", json!({ "message": format!("{e:#}") })),
        },
        None => ExperimentConfig::default(),
    };
    if let Some(k) = cfg.kind.filter(|&k| k != kind) {
        eprintln!("note: configuration kind {:?} replaced by the subcommand {:?}", k.name(), kind.name());
    }
    cfg.kind = Some(kind);
    if let Some(out) = common.out {
        cfg.output.dir = Some(out);
    }
    if let Some(s) = common.seeds {
        cfg.coefficients.seeds = Some(s.0);
    }
    let violations = validate(&cfg);
    if !violations.is_empty() {
        return fail("invalid configuration", json!({ "violations": violations }));
    }

    match execute(&cfg, common.threads, RunOptions { strict: common.strict, calibrate, config_path: common.config }) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("{}", json!({ "error": "run failed", "message": format!("{e:#}") }));
            ExitCode::from(3)
        }
    }
}

fn execute(cfg: &ExperimentConfig, threads: Option<usize>, opts: RunOptions) -> Result<bool> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| anyhow!(e)).context("starting the worker pool")?;
    }
    let outcome = run(cfg, &opts)?;
    eprintln!("{} files written to {}; {}", outcome.files.len(), cfg.output.dir.as_deref().unwrap_or_else(|| "".as_ref()).display(), if outcome.passed { "all checks pass" } else { "some checks fail" });
    Ok(outcome.passed)
}
