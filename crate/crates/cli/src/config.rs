//! Experiment configuration and its validation.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use hypokin::estimates::field::Frame;
use hypokin::solver::grid::Axis;
use hypokin::solver::scheme::SolveGrid;
use hypokin::suite::{EnsembleSpec, POINCARE_ORIGIN};
use hypokin::{KineticCylinder, PhasePoint};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    KernelCheck,
    Solve,
    Verify,
    Ensemble,
    Constants,
    Counterexample,
    Convergence,
}

impl Kind {
    pub fn needs_solver(self) -> bool {
        matches!(self, Kind::Solve | Kind::Verify | Kind::Ensemble)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::KernelCheck => "kernel-check",
            Kind::Solve => "solve",
            Kind::Verify => "verify",
            Kind::Ensemble => "ensemble",
            Kind::Constants => "constants",
            Kind::Counterexample => "counterexample",
            Kind::Convergence => "convergence",
        }
    }
}

/// Check families run on each ensemble member.
pub const CHECK_FAMILIES: [&str; 7] = ["weak_residual", "energy", "gain_int", "gain_reg", "linfty", "poincare", "oscillation_decay"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub t: Option<[f64; 2]>,
    pub x: Option<[f64; 2]>,
    pub v: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Cells along `t`, `x`, `v`.
    pub n: Option<[usize; 3]>,
    pub padding: Option<[f64; 3]>,
    /// Sub-box whose nodes are kept.
    pub record: Option<[[f64; 2]; 3]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub lambda: Option<f64>,
    #[serde(rename = "Lambda")]
    pub cap_lambda: Option<f64>,
    pub s_amp: Option<f64>,
    /// Coefficient cell size in grid cells.
    pub cell: Option<[usize; 3]>,
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub enabled: Option<Vec<String>>,
    pub sigma: Option<f64>,
    pub c_universal: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantSpec {
    pub d: Option<usize>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub s_inf: Option<f64>,
    pub sigma: Option<f64>,
    pub c_universal: Option<f64>,
    pub delta0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSpec {
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    /// Calibration file replacing the shipped one.
    pub calibration: Option<PathBuf>,
    pub c_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    #[serde(default, rename = "box")]
    pub domain: BoxSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub coefficients: CoefficientSpec,
    #[serde(default)]
    pub checks: CheckSpec,
    #[serde(default)]
    pub constants: ConstantSpec,
    #[serde(default)]
    pub counterexample: CounterexampleSpec,
    #[serde(default)]
    pub convergence: ConvergenceSpec,
    #[serde(default)]
    pub tolerance: ToleranceSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let s = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&s).with_context(|| format!("parsing {}", path.display()))
    }

    /// The ensemble of a validated solver configuration.
    pub fn ensemble_spec(&self) -> anyhow::Result<EnsembleSpec> {
        let (b, c) = (&self.domain, &self.coefficients);
        let (Some(t), Some(x), Some(v), Some(n)) = (b.t, b.x, b.v, self.grid.n) else {
            anyhow::bail!("box and grid are incomplete");
        };
        let axes = [Axis::new(t[0], t[1], n[0])?, Axis::new(x[0], x[1], n[1])?, Axis::new(v[0], v[1], n[2])?];
        let mut grid = SolveGrid::new(axes[0], axes[1], axes[2]);
        if let Some(p) = self.grid.padding {
            grid.padding = p;
        }
        grid.record = self.grid.record.map(|r| r.map(|[lo, hi]| (lo, hi)));
        let cell = c.cell.unwrap_or([4, 4, 4]);
        let def = EnsembleSpec::default();
        Ok(EnsembleSpec {
            lambda: c.lambda.unwrap_or(def.lambda),
            cap_lambda: c.cap_lambda.unwrap_or(def.cap_lambda),
            s_amp: c.s_amp.unwrap_or(def.s_amp),
            cell: [0, 1, 2].map(|k| cell[k] as f64 * axes[k].step()),
            grid,
            sigma: self.checks.sigma.unwrap_or(def.sigma),
            c_universal: self.checks.c_universal.unwrap_or(def.c_universal),
        })
    }

    pub fn seeds(&self) -> &[u64] {
        self.coefficients.seeds.as_deref().unwrap_or(&[])
    }

    /// Whether reports of `statement` are kept.
    pub fn enabled(&self, statement: &str) -> bool {
        let family = statement.split('[').next().unwrap_or(statement);
        self.checks.enabled.as_ref().map_or(true, |e| e.iter().any(|f| f == family))
    }
}

/// Cylinders the member checks measure on, in physical coordinates.
pub fn member_cylinders() -> Vec<(&'static str, KineticCylinder)> {
    let o = PhasePoint::origin();
    let q1 = KineticCylinder::centered(o, 1.0).expect("unit cylinder");
    let q5 = KineticCylinder::centered(o, 5.0).expect("Q_5");
    vec![("Q_1", q1), ("poincare Q_5", Frame::new(POINCARE_ORIGIN, 0.2).cylinder(&q5))]
}

fn missing(out: &mut Vec<Violation>, field: &str, present: bool) {
    if !present {
        out.push(Violation { field: field.into(), reason: "required".into() });
    }
}

fn bad(out: &mut Vec<Violation>, field: &str, reason: impl Into<String>) {
    out.push(Violation { field: field.into(), reason: reason.into() });
}

/// Every reason the configuration cannot run; empty iff it can.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    missing(&mut out, "kind", cfg.kind.is_some());
    missing(&mut out, "output.dir", cfg.output.dir.is_some());
    let Some(kind) = cfg.kind else { return out };

    if kind.needs_solver() {
        validate_solver(cfg, kind, &mut out);
    }
    if kind == Kind::Constants {
        let c = &cfg.constants;
        missing(&mut out, "constants.delta1", c.delta1.is_some());
        missing(&mut out, "constants.delta2", c.delta2.is_some());
        missing(&mut out, "constants.s_inf", c.s_inf.is_some());
        for (name, v) in [("constants.delta1", c.delta1), ("constants.delta2", c.delta2), ("constants.delta0", c.delta0)] {
            if v.is_some_and(|v| !(v > 0.0 && v < 1.0)) {
                bad(&mut out, name, "must lie in (0, 1)");
            }
        }
        if c.s_inf.is_some_and(|s| !(s >= 0.0 && s.is_finite())) {
            bad(&mut out, "constants.s_inf", "must be finite and non-negative");
        }
        if c.d.is_some_and(|d| d == 0) {
            bad(&mut out, "constants.d", "must be at least 1");
        }
    }
    if kind == Kind::Counterexample && cfg.counterexample.delta.is_some_and(|d| !(d > 0.0 && d < 1.0)) {
        bad(&mut out, "counterexample.delta", "must lie in (0, 1)");
    }
    if kind == Kind::Convergence && cfg.convergence.levels.is_some_and(|l| !(3..=5).contains(&l)) {
        bad(&mut out, "convergence.levels", "must lie in 3..=5");
    }
    out
}

fn validate_solver(cfg: &ExperimentConfig, kind: Kind, out: &mut Vec<Violation>) {
    let (b, g, c) = (&cfg.domain, &cfg.grid, &cfg.coefficients);
    missing(out, "box.t", b.t.is_some());
    missing(out, "box.x", b.x.is_some());
    missing(out, "box.v", b.v.is_some());
    missing(out, "grid.n", g.n.is_some());
    missing(out, "coefficients.lambda", c.lambda.is_some());
    missing(out, "coefficients.Lambda", c.cap_lambda.is_some());
    missing(out, "coefficients.s_amp", c.s_amp.is_some());
    missing(out, "coefficients.cell", c.cell.is_some());
    missing(out, "coefficients.seeds", c.seeds.is_some());

    let mut box_ok = true;
    for (name, a) in [("box.t", b.t), ("box.x", b.x), ("box.v", b.v)] {
        if let Some([lo, hi]) = a {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                bad(out, name, "needs finite bounds with lo < hi");
                box_ok = false;
            }
        }
    }
    if let Some(n) = g.n {
        if n.iter().any(|&k| k < 2) {
            bad(out, "grid.n", "every axis needs at least two cells");
            box_ok = false;
        }
    }
    if g.padding.is_some_and(|p| p.iter().any(|&q| !(q >= 0.0 && q.is_finite()))) {
        bad(out, "grid.padding", "must be finite and non-negative");
        box_ok = false;
    }
    if let (Some(l), Some(u)) = (c.lambda, c.cap_lambda) {
        if !(l > 0.0 && l <= 1.0 && u >= 1.0 && l <= u && u.is_finite()) {
            bad(out, "coefficients", "need 0 < lambda <= 1 <= Lambda < inf");
        }
    }
    if c.s_amp.is_some_and(|s| !(s >= 0.0 && s.is_finite())) {
        bad(out, "coefficients.s_amp", "must be finite and non-negative");
    }
    if c.cell.is_some_and(|k| k.contains(&0)) {
        bad(out, "coefficients.cell", "cell sizes must be positive");
    }
    if let Some(s) = &c.seeds {
        if s.is_empty() && kind == Kind::Ensemble {
            bad(out, "coefficients.seeds", "must be nonempty for an ensemble");
        } else if s.is_empty() {
            bad(out, "coefficients.seeds", "must name at least one seed");
        }
    }
    if let Some(e) = &cfg.checks.enabled {
        for name in e.iter().filter(|n| !CHECK_FAMILIES.contains(&n.as_str())) {
            bad(out, "checks.enabled", format!("unknown check {name:?}; known: {}", CHECK_FAMILIES.join(", ")));
        }
    }
    if cfg.checks.sigma.is_some_and(|s| !(s > 0.0 && s < 1.0 / 3.0)) {
        bad(out, "checks.sigma", "must lie in (0, 1/3)");
    }
    if cfg.tolerance.c_tol.is_some_and(|s| !(s > 0.0 && s.is_finite())) {
        bad(out, "tolerance.c_tol", "must be positive");
    }
    if !box_ok || b.t.is_none() || b.x.is_none() || b.v.is_none() || g.n.is_none() {
        return;
    }
    let Ok(spec) = cfg.ensemble_spec() else { return };
    if let Err(e) = spec.grid.check() {
        bad(out, "grid.n", e.to_string());
    }
    // The fractional seminorm needs four x-cells across the width 1/4 of `Q_{1/2}`.
    let dx = spec.grid.x.step();
    if dx > 0.05 {
        bad(out, "grid.n", format!("x spacing {dx} leaves fewer than four cells across Q_1/2; need at most 0.05"));
    }
    let safe = safe_box(&spec.grid);
    for (name, cyl) in member_cylinders() {
        if !fits(&cyl, &safe) {
            bad(out, &format!("cylinder {name}"), format!("does not fit in the box minus padding {safe:?}"));
        }
    }
}

/// The solve box shrunk by the padding, cut to the record box.
pub fn safe_box(g: &SolveGrid) -> [(f64, f64); 3] {
    let mut b = [(g.t.lo, g.t.hi), (g.x.lo, g.x.hi), (g.v.lo, g.v.hi)];
    for (k, side) in b.iter_mut().enumerate() {
        side.0 += g.padding[k];
        side.1 -= g.padding[k];
        if let Some(r) = g.record {
            side.0 = side.0.max(r[k].0);
            side.1 = side.1.min(r[k].1);
        }
    }
    b
}

fn fits(c: &KineticCylinder, b: &[(f64, f64); 3]) -> bool {
    let tol = 1e-12;
    let (lo, hi) = c.time_window();
    let xs = [c.x_center(lo)[0], c.x_center(hi)[0]];
    lo >= b[0].0 - tol
        && hi <= b[0].1 + tol
        && xs.iter().all(|&m| m - c.rx >= b[1].0 - tol && m + c.rx <= b[1].1 + tol)
        && c.anchor.v[0] - c.rv >= b[2].0 - tol
        && c.anchor.v[0] + c.rv <= b[2].1 + tol
}
