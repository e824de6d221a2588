//! Experiment runners and their output files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use hypokin::estimates::calibration::Calibration;
use hypokin::estimates::constants::ConstantInputs;
use hypokin::estimates::report::write_summary_csv;
use hypokin::solver::convergence::{convergence_study, ConvergenceCase, ConvergenceStudy};
use hypokin::solver::scheme::solve;
use hypokin::suite::{self, ensemble_datum, EnsembleSpec, MemberRun};
use hypokin::{EstimateReport, PaperConstants, Status};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, Kind};

/// Grids up to this many nodes also get a CSV copy.
const CSV_NODE_LIMIT: usize = 100_000;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Fail the run when a member's solve fails.
    pub strict: bool,
    /// Write a fresh calibration here before an ensemble run, and use it.
    pub calibrate: Option<PathBuf>,
    pub config_path: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

struct Out {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Out {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let p = self.dir.join(name);
        let f = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
        self.files.push(p);
        Ok(BufWriter::new(f))
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn csv<R: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = R>) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.create(name)?);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn summary(&mut self, reports: &[EstimateReport]) -> Result<()> {
        let w = self.create("summary.csv")?;
        write_summary_csv(w, reports)?;
        Ok(())
    }
}

/// Run a validated configuration, writing every output under its output
/// directory. Timing lives in `metadata.json` only, so the other files are
/// reproducible byte for byte.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome> {
    let Some(kind) = cfg.kind else { bail!("configuration has no kind") };
    let Some(dir) = cfg.output.dir.clone() else { bail!("configuration has no output directory") };
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut out = Out { dir, files: Vec::new() };
    let started = Instant::now();
    let passed = match kind {
        Kind::KernelCheck => kernel_check(&mut out)?,
        Kind::Solve => solve_members(cfg, &mut out)?,
        Kind::Verify | Kind::Ensemble => ensemble(cfg, kind, opts, &mut out)?,
        Kind::Constants => constants(cfg, &mut out)?,
        Kind::Counterexample => counterexample(cfg, &mut out)?,
        Kind::Convergence => convergence(cfg, &mut out)?,
    };
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let files: Vec<String> = out.files.iter().map(|p| p.display().to_string()).collect();
    let meta = json!({
        "kind": kind.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": opts.config_path.as_ref().map(|p| p.display().to_string()),
        "started_unix": stamp,
        "elapsed_seconds": started.elapsed().as_secs_f64(),
        "threads": rayon::current_num_threads(),
        "passed": passed,
        "files": files,
    });
    out.json("metadata.json", &meta)?;
    Ok(Outcome { passed, files: out.files })
}

fn kernel_check(out: &mut Out) -> Result<bool> {
    let checks = suite::kernel_suite()?;
    out.json("reports.json", &checks)?;
    out.csv("summary.csv", &checks)?;
    Ok(checks.iter().all(|c| c.pass))
}

#[derive(Serialize)]
struct SolveRecord {
    seed: u64,
    shape: [usize; 3],
    min: f64,
    max: f64,
    file: Option<String>,
    error: Option<String>,
}

fn solve_members(cfg: &ExperimentConfig, out: &mut Out) -> Result<bool> {
    let spec = cfg.ensemble_spec()?;
    let grids: Vec<_> = cfg
        .seeds()
        .par_iter()
        .map(|&s| {
            let coef = spec.coefficients(s)?;
            let mut f = solve(&ensemble_datum, &coef, &spec.grid)?;
            f.metadata.insert("source".into(), format!("ensemble seed={s}"));
            Ok::<_, hypokin::Error>((s, f))
        })
        .collect();
    let mut records = Vec::new();
    for (r, &s) in grids.into_iter().zip(cfg.seeds()) {
        match r {
            Ok((s, f)) => {
                let name = format!("solution-seed{s}.hkg");
                f.write_binary(out.create(&name)?)?;
                if f.data.len() <= CSV_NODE_LIMIT {
                    f.write_csv(out.create(&format!("solution-seed{s}.csv"))?)?;
                }
                let (min, max) = f.data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                records.push(SolveRecord { seed: s, shape: f.shape(), min, max, file: Some(name), error: None });
            }
            Err(e) => records.push(SolveRecord { seed: s, shape: spec.shape(), min: f64::NAN, max: f64::NAN, file: None, error: Some(e.to_string()) }),
        }
    }
    out.json("reports.json", &records)?;
    Ok(records.iter().all(|r| r.error.is_none()))
}

/// The calibration to judge with, and a note when its bounds do not apply.
fn calibration(cfg: &ExperimentConfig, spec: &EnsembleSpec, opts: &RunOptions) -> Result<(Calibration, Vec<String>)> {
    let mut notes = Vec::new();
    let mut calib = if let Some(path) = &opts.calibrate {
        let c = suite::calibrate(spec, cfg.seeds())?;
        std::fs::write(path, c.to_json()?).with_context(|| format!("writing {}", path.display()))?;
        notes.push(format!("calibrated on seeds {:?}", cfg.seeds()));
        c
    } else if let Some(path) = &cfg.tolerance.calibration {
        let s = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Calibration::from_json(&s)?
    } else {
        Calibration::pinned()
    };
    if calib.grid != spec.shape() {
        notes.push(format!("calibration grid {:?} differs from run grid {:?}; calibrated checks are recorded, not judged", calib.grid, spec.shape()));
        calib.max_constants.clear();
    }
    if let Some(c) = cfg.tolerance.c_tol {
        calib.c_tol = c;
    }
    Ok((calib, notes))
}

#[derive(Serialize)]
struct Failure {
    seed: u64,
    error: String,
}

#[derive(Serialize)]
struct RatioRow<'a> {
    statement: &'a str,
    seed: u64,
    ratio: Option<f64>,
    bound: Option<f64>,
    status: Status,
}

#[derive(Serialize)]
struct OscRow {
    seed: u64,
    center_t: f64,
    center_x: f64,
    center_v: f64,
    radius: f64,
    osc: f64,
}

fn ensemble(cfg: &ExperimentConfig, kind: Kind, opts: &RunOptions, out: &mut Out) -> Result<bool> {
    let spec = cfg.ensemble_spec()?;
    let seeds: Vec<u64> = if kind == Kind::Verify { cfg.seeds().iter().take(1).copied().collect() } else { cfg.seeds().to_vec() };
    let (calib, notes) = calibration(cfg, &spec, opts)?;

    let runs: Vec<Result<MemberRun, String>> = seeds
        .par_iter()
        .map(|&s| -> hypokin::Result<MemberRun> {
            if kind == Kind::Verify {
                let coef = spec.coefficients(s)?;
                let mut f = solve(&ensemble_datum, &coef, &spec.grid)?;
                f.metadata.insert("source".into(), format!("ensemble seed={s}"));
                let mut buf = Vec::new();
                f.write_binary(&mut buf)?;
                std::fs::write(out.dir.join(format!("solution-seed{s}.hkg")), buf)?;
                suite::measure_member(&f, &coef, &spec, s, &calib)
            } else {
                suite::run_member(&spec, s, &calib)
            }
        })
        .map(|r| r.map_err(|e| e.to_string()))
        .collect();
    if kind == Kind::Verify {
        out.files.extend(seeds.iter().map(|s| out.dir.join(format!("solution-seed{s}.hkg"))));
    }

    let mut reports = Vec::new();
    let mut osc = Vec::new();
    let mut failures = Vec::new();
    for (r, &seed) in runs.into_iter().zip(&seeds) {
        match r {
            Ok(m) => {
                reports.extend(m.reports.into_iter().filter(|r| cfg.enabled(&r.statement)));
                if cfg.enabled("oscillation_decay") {
                    for s in &m.oscillation {
                        for (&radius, &o) in s.radii.iter().zip(&s.osc) {
                            osc.push(OscRow { seed, center_t: s.center.t, center_x: s.center.x[0], center_v: s.center.v[0], radius, osc: o });
                        }
                    }
                }
            }
            Err(error) => failures.push(Failure { seed, error }),
        }
    }

    let doc = json!({
        "kind": kind.name(),
        "spec": spec,
        "seeds": seeds,
        "calibration": { "c_tol": calib.c_tol, "factor": calib.factor, "grid": calib.grid, "max_constants": calib.max_constants },
        "notes": notes,
        "failures": failures,
        "reports": reports,
    });
    out.json("reports.json", &doc)?;
    out.summary(&reports)?;
    out.csv(
        "ratio_vs_seed.csv",
        reports.iter().map(|r| RatioRow { statement: &r.statement, seed: r.provenance.seed.unwrap_or(0), ratio: r.empirical_constant, bound: r.bound, status: r.status }),
    )?;
    if !osc.is_empty() {
        out.csv("osc_vs_radius.csv", osc)?;
    }
    Ok(verdict(reports.iter().all(EstimateReport::passed), failures.len(), seeds.len(), opts.strict))
}

/// Pass iff every check passes and some member solved; with `strict`, no
/// member may fail.
fn verdict(checks_pass: bool, failed: usize, members: usize, strict: bool) -> bool {
    checks_pass && failed < members && (failed == 0 || !strict)
}

#[derive(Serialize)]
struct ConstantTuple {
    inputs: ConstantInputs,
    r0: f64,
    epsilon: f64,
    theta: f64,
    nu: f64,
    mu: f64,
    alpha: f64,
    neg_ln_mu: f64,
    neg_ln_alpha: f64,
    zeta: f64,
    ln_epsilon: f64,
    ln_theta: f64,
    ln_nu: f64,
}

fn constants(cfg: &ExperimentConfig, out: &mut Out) -> Result<bool> {
    let c = &cfg.constants;
    let (Some(d1), Some(d2), Some(s)) = (c.delta1, c.delta2, c.s_inf) else { bail!("constants need delta1, delta2 and s_inf") };
    let mut inp = ConstantInputs::new(c.d.unwrap_or(1), d1, d2, s);
    inp.sigma = c.sigma.unwrap_or(inp.sigma);
    inp.c_universal = c.c_universal.unwrap_or(inp.c_universal);
    inp.delta0 = c.delta0.unwrap_or(inp.delta0);
    let k = PaperConstants::new(inp)?;
    let t = ConstantTuple {
        inputs: inp,
        r0: k.r0,
        epsilon: k.epsilon(),
        theta: k.theta(),
        nu: k.nu(),
        mu: k.mu(),
        alpha: k.alpha(),
        neg_ln_mu: k.neg_ln_mu(),
        neg_ln_alpha: k.neg_ln_alpha(),
        zeta: k.zeta(),
        ln_epsilon: k.ln_eps,
        ln_theta: k.ln_theta,
        ln_nu: k.ln_nu,
    };
    println!("{}", serde_json::to_string_pretty(&t)?);
    out.json("reports.json", &t)?;
    Ok(true)
}

fn counterexample(cfg: &ExperimentConfig, out: &mut Out) -> Result<bool> {
    let g = suite::gap_counterexample(cfg.counterexample.delta.unwrap_or(0.01))?;
    out.json("reports.json", &g)?;
    out.summary(&[g.gap_removed.clone(), g.with_gap.clone()])?;
    let fraction = g.gap_removed.diagnostics.get("intermediate_fraction").copied();
    Ok(g.gap_removed.status != Status::HypothesesUnmet && fraction == Some(0.0))
}

#[derive(Serialize)]
struct ConvergenceRow {
    case: ConvergenceCase,
    level: usize,
    spacing: f64,
    error: f64,
}

fn convergence_ok(s: &ConvergenceStudy) -> bool {
    s.monotone
        && match s.case {
            ConvergenceCase::Transport => s.order >= 2.0,
            ConvergenceCase::Diffusion => (s.order - 2.0).abs() <= 0.2,
            ConvergenceCase::Splitting => s.order >= 1.0,
        }
}

fn convergence(cfg: &ExperimentConfig, out: &mut Out) -> Result<bool> {
    let levels = cfg.convergence.levels.unwrap_or(3);
    let studies = [ConvergenceCase::Transport, ConvergenceCase::Diffusion, ConvergenceCase::Splitting]
        .iter()
        .map(|&c| convergence_study(c, levels))
        .collect::<hypokin::Result<Vec<_>>>()?;
    let pass: Vec<bool> = studies.iter().map(convergence_ok).collect();
    out.json("reports.json", &json!({ "studies": studies, "pass": pass }))?;
    let rows = studies.iter().flat_map(|s| s.spacings.iter().zip(&s.errors).enumerate().map(|(level, (&spacing, &error))| ConvergenceRow { case: s.case, level, spacing, error }));
    out.csv("error_vs_spacing.csv", rows)?;
    Ok(pass.iter().all(|&p| p))
}
