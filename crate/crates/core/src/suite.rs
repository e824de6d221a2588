//! Reproducible scenarios shared by the command-line runner and the tests:
//! the rough-coefficient ensemble, the solver-vs-kernel oracle, the
//! intermediate value instances, the Harnack suite and the kernel checks.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimates::calibration::Calibration;
use crate::estimates::checks::{
    check_energy_estimate, check_gain_integrability, check_harnack, check_ivl, check_linfty_bound, check_measure_to_pointwise, check_oscillation_decay,
    check_sobolev_gain, check_weak_harnack, check_weak_poincare, IvlGeometry, OscillationSeries, HARNACK_R0,
};
use crate::estimates::constants::{paper_constants, PaperConstants};
use crate::estimates::field::{ConstantField, Frame, PhaseField, Quadrature, Setting};
use crate::estimates::report::{EstimateReport, RhsTerm};
use crate::geometry::{CylinderKind, KineticCylinder, PhasePoint};
use crate::kernel::{g1, kernel_mass, kernel_pde_residual, pde_residual_of, propagate, split_kernel, KernelQuadrature, ResidualRegion};
use crate::solver::coefficients::CoefficientField;
use crate::solver::fields::{IndicatorField, KernelSolution};
use crate::solver::grid::{Axis, GridFunction};
use crate::solver::scheme::{solve, SolveGrid};
use crate::solver::weak::{tolerance_grid, weak_subsolution_residual, weak_supersolution_residual, WeakTestBasis};

/// The ensemble's initial datum, the same for every seed.
pub fn ensemble_datum(x: f64, v: f64) -> f64 {
    0.3 + (-(x * x + v * v)).exp()
}

/// Rough-coefficient ensemble on `t ∈ [-1, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub cap_lambda: f64,
    pub s_amp: f64,
    /// Coefficient cell size in `t`, `x`, `v`; fixed under refinement.
    pub cell: [f64; 3],
    pub grid: SolveGrid,
    /// Statement parameters of the checks.
    pub sigma: f64,
    pub c_universal: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        let t = Axis { lo: -1.0, hi: 0.0, n: 160 };
        let x = Axis { lo: -3.0, hi: 3.0, n: 256 };
        let v = Axis { lo: -3.75, hi: 3.75, n: 160 };
        let mut grid = SolveGrid::new(t, x, v);
        grid.record = Some([(-1.0, 0.0), (-2.2, 2.2), (-1.2, 1.2)]);
        Self { lambda: 0.5, cap_lambda: 2.0, s_amp: 0.25, cell: [4.0 * t.step(), 4.0 * x.step(), 4.0 * v.step()], grid, sigma: 0.25, c_universal: 10.0 }
    }
}

impl EnsembleSpec {
    /// Every spacing halved.
    pub fn refined(&self) -> Self {
        Self { grid: self.grid.refined(2), ..*self }
    }

    /// The `x` and `v` extent enlarged by 50% at the same spacing; the time
    /// step shrinks with the larger `v_max` to keep the transport stable.
    pub fn enlarged(&self) -> Self {
        let mut g = self.grid;
        for a in [&mut g.x, &mut g.v] {
            let c = 0.5 * (a.lo + a.hi);
            let (h, n) = (a.step(), a.n);
            a.n = n + n / 2;
            a.lo = c - 0.5 * h * a.n as f64;
            a.hi = c + 0.5 * h * a.n as f64;
        }
        g.t.n = g.t.n * 3 / 2;
        Self { grid: g, ..*self }
    }

    pub fn coefficients(&self, seed: u64) -> Result<CoefficientField> {
        CoefficientField::rough(seed, self.lambda, self.cap_lambda, self.cap_lambda, self.s_amp, self.cell)
    }

    /// Test functions covering the interior of `Q_1`.
    pub fn basis(&self) -> Result<WeakTestBasis> {
        WeakTestBasis::tiled([(-0.9, -0.1), (-0.9, 0.9), (-0.9, 0.9)], [3, 3, 3], (0.3, 1.3))
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.grid.t.n, self.grid.x.n, self.grid.v.n]
    }

    pub fn constants(&self) -> Result<PaperConstants> {
        paper_constants(1, 0.5, 0.5, 0.0, self.sigma, self.c_universal)
    }
}

/// Everything measured on one ensemble member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRun {
    pub seed: u64,
    pub reports: Vec<EstimateReport>,
    pub oscillation: Vec<OscillationSeries>,
}

impl MemberRun {
    pub fn report(&self, statement: &str) -> Option<&EstimateReport> {
        self.reports.iter().find(|r| r.statement == statement)
    }
}

/// Where the weak Poincaré inequality is checked, at scale `0.2` so that
/// `Q_5` is the physical `Q_1(0, -1, 0)`. Off the symmetry axis of the datum,
/// so the left side does not vanish.
pub const POINCARE_ORIGIN: PhasePoint = PhasePoint { t: 0.0, x: [-1.0], v: [0.0] };

/// Centers, in the oscillation frame, at which decay is measured.
pub const OSCILLATION_CENTERS: [(f64, f64, f64); 4] = [(0.0, 0.0, 0.0), (-0.5, 0.3, -0.4), (-0.25, -0.5, 0.5), (-0.75, 0.6, 0.2)];

fn residual_report(id: &str, value: f64, tol: f64) -> EstimateReport {
    EstimateReport::new(id, value.max(0.0), vec![RhsTerm::new("tolerance_grid", tol)], Some(1.0)).diag("raw_residual", value)
}

/// Solve one member and run every checker on it.
pub fn run_member(spec: &EnsembleSpec, seed: u64, calib: &Calibration) -> Result<MemberRun> {
    let coef = spec.coefficients(seed)?;
    let mut f = solve(&ensemble_datum, &coef, &spec.grid)?;
    f.metadata.insert("source".into(), format!("ensemble seed={seed}"));
    measure_member(&f, &coef, spec, seed, calib)
}

/// The checks of [`run_member`] on an already solved grid.
pub fn measure_member(f: &GridFunction, coef: &CoefficientField, spec: &EnsembleSpec, seed: u64, calib: &Calibration) -> Result<MemberRun> {
    let tol = tolerance_grid(f.steps(), calib.c_tol);
    let basis = spec.basis()?;
    let sub = weak_subsolution_residual(f, coef, &basis)?;
    let sup = weak_supersolution_residual(f, coef, &basis)?;
    let mut reports = vec![residual_report("weak_residual[sub]", sub.max, tol), residual_report("weak_residual[super]", sup.max, tol)];

    let set = Setting::new(f).with_coefficients(coef);
    let o = PhasePoint::origin();
    let (qr, qbig) = (KineticCylinder::centered(o, 0.5)?, KineticCylinder::centered(o, 1.0)?);
    reports.push(check_energy_estimate(&set, &qr, &qbig, calib.bound("energy"))?);
    for p in [2.0, 2.4] {
        reports.push(check_gain_integrability(&set, &qr, &qbig, p, calib.bound(&format!("gain_int[p={p}]")))?);
    }
    for s in [0.1, 0.25] {
        reports.push(check_sobolev_gain(&set, &qr, &qbig, s, calib.bound(&format!("gain_reg[sigma={s}]")))?);
    }
    for z in [0.5, 2.0] {
        reports.push(check_linfty_bound(&set, &qr, &qbig, z, calib.bound(&format!("linfty[zeta={z}]")))?);
    }
    let poincare = set.in_frame(Frame::new(POINCARE_ORIGIN, 0.2)).with_quadrature(Quadrature::Lattice([32, 32, 32]));
    for e in [0.5, 0.25, 0.1] {
        reports.push(check_weak_poincare(&poincare, e, spec.sigma, calib.bound(&format!("poincare[eps={e}]")))?);
    }
    let consts = spec.constants()?;
    let centers: Vec<PhasePoint> = OSCILLATION_CENTERS.iter().map(|&(t, x, v)| PhasePoint::new(t, [x], [v])).collect();
    let decay = check_oscillation_decay(&set.in_frame(Frame::new(o, 0.5)), &consts, &centers, 2, 1e-12)?;
    reports.push(decay.report);
    for r in &mut reports {
        r.provenance.seed = Some(seed);
        r.provenance.grid = Some(f.shape());
    }
    Ok(MemberRun { seed, reports, oscillation: decay.series })
}

/// `max residual / (Δt + Δx² + Δv²)` for the constant-coefficient solve of
/// the ensemble datum on `spec`'s grid and one refinement, both signs.
pub fn smooth_residual_ratio(spec: &EnsembleSpec) -> Result<f64> {
    let coef = CoefficientField::constant(1.0, 0.0, 0.0)?;
    let basis = spec.basis()?;
    let mut worst: f64 = 0.0;
    for grid in [spec.grid, spec.grid.refined(2)] {
        let f = solve(&ensemble_datum, &coef, &grid)?;
        let unit = tolerance_grid(f.steps(), 1.0);
        for r in [weak_subsolution_residual(&f, &coef, &basis)?, weak_supersolution_residual(&f, &coef, &basis)?] {
            worst = worst.max(r.max / unit);
        }
    }
    Ok(worst)
}

/// The Harnack-suite statements that get calibrated bounds.
pub const HARNACK_STATEMENTS: [&str; 2] = ["harnack", "weak_harnack[zeta=0.5]"];

/// Produce a calibration: `C_tol` from the smooth runs, then the maxima of
/// the ensemble and Harnack-suite constants.
pub fn calibrate(spec: &EnsembleSpec, seeds: &[u64]) -> Result<Calibration> {
    let observed = smooth_residual_ratio(spec)?;
    let provisional = Calibration::from_reports(seeds.to_vec(), spec.shape(), observed, []);
    let mut reports = Vec::new();
    for &s in seeds {
        reports.extend(run_member(spec, s, &provisional)?.reports);
    }
    let harnack = harnack_suite(&HarnackConfig::default(), &provisional)?;
    for m in &harnack.members {
        reports.push(m.harnack.clone());
        reports.push(m.weak.clone());
    }
    let keep = |r: &&EstimateReport| !r.statement.starts_with("weak_residual") && r.statement != "oscillation_decay";
    Ok(Calibration::from_reports(seeds.to_vec(), spec.shape(), observed, reports.iter().filter(keep)))
}

/// Relative sup error of the solver against the exact kernel solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub grid: [usize; 3],
    pub sup_error: f64,
    pub sup_exact: f64,
    pub relative_error: f64,
}

/// Constant coefficients `A = 1`, `B = S = 0`; the datum is the kernel at
/// time `1/2` (a point mass smoothed by the flow itself), so the exact
/// solution is `G(t + 1/2, x, v)`. Errors are taken over the grid nodes in
/// `Q_{1/2}((1, 0, 0))`.
pub fn kernel_oracle(refine: usize) -> Result<OracleRun> {
    let grid = SolveGrid::new(Axis::new(0.0, 1.0, 128)?, Axis::new(-8.0, 8.0, 256)?, Axis::new(-6.0, 6.0, 128)?).refined(refine);
    let coef = CoefficientField::constant(1.0, 0.0, 0.0)?;
    let f = solve(&|x, v| g1(0.5, x, v), &coef, &grid)?;
    let q = KineticCylinder::centered(PhasePoint::new(1.0, [0.0], [0.0]), 0.5)?;
    let (mut err, mut sup): (f64, f64) = (0.0, 0.0);
    let [at, ax, av] = f.axes;
    for i in 0..at.n {
        for j in 0..ax.n {
            for k in 0..av.n {
                let z = f.node(i, j, k);
                if q.contains(&z) {
                    let e = g1(z.t + 0.5, z.x[0], z.v[0]);
                    sup = sup.max(e.abs());
                    err = err.max((f.at(i, j, k) - e).abs());
                }
            }
        }
    }
    if sup == 0.0 {
        return Err(invalid("oracle cylinder contains no grid nodes"));
    }
    Ok(OracleRun { grid: f.shape(), sup_error: err, sup_exact: sup, relative_error: err / sup })
}

/// x-independent front `1 − 1.1·erfc((v − c0)/w)/2`: about `−0.1` below
/// `c0`, rounding to `1` a few widths above it.
pub fn front_datum(c0: f64, w: f64) -> impl Fn(f64, f64) -> f64 + Sync {
    move |_, v| 1.0 - 0.55 * libm::erfc((v - c0) / w)
}

/// A front marched with tiny constant diffusion on `[-1, 0] × [-1, 1]²`.
pub fn solve_front(c0: f64, w: f64) -> Result<GridFunction> {
    let mut grid = SolveGrid::new(Axis::new(-1.0, 0.0, 16)?, Axis::new(-1.0, 1.0, 8)?, Axis::new(-1.0, 1.0, 32768)?);
    grid.padding = [0.0, 0.5, 0.25];
    let coef = CoefficientField::constant(1e-7, 0.0, 0.0)?;
    let mut f = solve(&front_datum(c0, w), &coef, &grid)?;
    f.metadata.insert("source".into(), format!("front c0={c0} w={w}"));
    Ok(f)
}

/// Outcome of the intermediate value and measure-to-pointwise instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvlInstance {
    pub ivl: EstimateReport,
    pub measure_to_pointwise: EstimateReport,
}

/// Round-off band for `{f ≥ 1 − θ}`: `1 − θ` is `1` in double precision.
pub const LEVEL_BAND: f64 = 1e-12;

/// The solver-generated mixing instance with `δ1 = δ2 = 0.3`, and a cold
/// region covering just over half of `Q_{r0}^-` for the measure-to-pointwise
/// lemma with `δ = 1/2`.
pub fn ivl_instance() -> Result<IvlInstance> {
    let q = Quadrature::Lattice([16, 4, 4096]);
    let f = solve_front(-0.01, 4e-4)?;
    let consts = paper_constants(1, 0.3, 0.3, 0.0, 0.25, 10.0)?;
    let ivl = check_ivl(&Setting::new(&f).with_quadrature(q), &consts, IvlGeometry::Paper, LEVEL_BAND)?;
    let g = solve_front(0.005, 4e-4)?;
    let half = paper_constants(1, 0.5, 0.5, 0.0, 0.25, 10.0)?;
    let tol = tolerance_grid(g.steps(), 1.0);
    let m2p = check_measure_to_pointwise(&Setting::new(&g).with_quadrature(q), &half, tol)?;
    Ok(IvlInstance { ivl, measure_to_pointwise: m2p })
}

/// The travelling indicator showing the time gap cannot be dropped, tested
/// with and without the gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCounterexample {
    pub c: f64,
    pub a: f64,
    pub gap_removed: EstimateReport,
    pub with_gap: EstimateReport,
}

/// `1_{x + ct < a}` with `c = 1.01` and the front crossing `x = 0` at
/// `t = −r0²`, evaluated exactly on a lattice fine in time.
pub fn gap_counterexample(delta: f64) -> Result<GapCounterexample> {
    let consts = paper_constants(1, delta, delta, 0.0, 0.25, 10.0)?;
    let c = 1.01;
    let a = -c * consts.r0 * consts.r0;
    let f = IndicatorField { c, a, sign: 1.0 };
    let set = Setting::new(&f).with_quadrature(Quadrature::Lattice([200, 64, 2]));
    let mut gap_removed = check_ivl(&set, &consts, IvlGeometry::GapRemoved, 0.0)?;
    let mut with_gap = check_ivl(&set, &consts, IvlGeometry::Paper, 0.0)?;
    for r in [&mut gap_removed, &mut with_gap] {
        r.provenance.source = Some(format!("indicator c={c} a={a}"));
    }
    Ok(GapCounterexample { c, a, gap_removed, with_gap })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnackConfig {
    pub sources: usize,
    /// Grid nodes per axis on the box around the test cylinders.
    pub nodes: [usize; 3],
    pub zeta: f64,
    pub translation: PhasePoint,
    pub scale: f64,
}

impl Default for HarnackConfig {
    fn default() -> Self {
        Self { sources: 10, nodes: [48, 32, 32], zeta: 0.5, translation: PhasePoint::new(0.3, [-0.2], [0.4]), scale: 0.5 }
    }
}

impl HarnackConfig {
    pub fn refined(&self) -> Self {
        Self { nodes: self.nodes.map(|n| 2 * n), ..*self }
    }

    /// Kernel sources, all before `t = −1`.
    pub fn source_points(&self) -> Vec<PhasePoint> {
        (0..self.sources)
            .map(|k| {
                let s = k as f64;
                PhasePoint::new(-1.1 - 0.1 * s, [0.4 * (1.3 * s).sin()], [0.8 * (0.7 * s + 0.5).cos()])
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackMember {
    pub source: PhasePoint,
    pub harnack: EstimateReport,
    pub weak: EstimateReport,
    /// Ratios after translating field, coefficients and cylinders jointly.
    pub harnack_translated: f64,
    pub weak_translated: f64,
    /// Ratios after the kinetic scaling.
    pub harnack_scaled: f64,
    pub weak_scaled: f64,
}

impl HarnackMember {
    /// Largest relative deviation of the moved configurations.
    pub fn invariance_error(&self) -> f64 {
        let h = self.harnack.empirical_constant.unwrap_or(f64::NAN);
        let w = self.weak.empirical_constant.unwrap_or(f64::NAN);
        [(self.harnack_translated, h), (self.harnack_scaled, h), (self.weak_translated, w), (self.weak_scaled, w)]
            .iter()
            .map(|(a, b)| (a - b).abs() / b.abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackSuite {
    /// Harnack ratio of `f ≡ 1`.
    pub constant_ratio: f64,
    /// Weak-Harnack left side with `ζ = 1` on `f ≡ 1`, and `|Q̃^-_{r0/2}|`.
    pub weak_constant_lhs: f64,
    pub weak_constant_expected: f64,
    pub members: Vec<HarnackMember>,
}

fn bounding_box(cyls: &[KineticCylinder]) -> [(f64, f64); 3] {
    let mut b = [(f64::INFINITY, f64::NEG_INFINITY); 3];
    for c in cyls {
        let (lo, hi) = c.time_window();
        b[0] = (b[0].0.min(lo), b[0].1.max(hi));
        for t in [lo, hi] {
            let m = c.x_center(t)[0];
            b[1] = (b[1].0.min(m - c.rx), b[1].1.max(m + c.rx));
        }
        b[2] = (b[2].0.min(c.anchor.v[0] - c.rv), b[2].1.max(c.anchor.v[0] + c.rv));
    }
    b
}

/// `field` sampled on a box around the Harnack cylinders seen through `frame`.
fn harnack_grid(field: &KernelSolution, frame: &Frame, nodes: [usize; 3]) -> Result<GridFunction> {
    let o = PhasePoint::origin();
    let r0 = HARNACK_R0;
    let unit = [
        KineticCylinder::new(CylinderKind::TildePast { quarter: false }, o, r0)?,
        KineticCylinder::new(CylinderKind::Past, o, r0)?,
        KineticCylinder::centered(o, r0 / 2.0)?,
    ];
    let phys: Vec<KineticCylinder> = unit.iter().map(|c| frame.cylinder(c)).collect();
    let b = bounding_box(&phys);
    let axes = [Axis::new(b[0].0, b[0].1, nodes[0])?, Axis::new(b[1].0, b[1].1, nodes[1])?, Axis::new(b[2].0, b[2].1, nodes[2])?];
    let mut g = GridFunction::from_fn(axes, |t, x, v| field.value(&PhasePoint::new(t, [x], [v])));
    g.metadata.insert("source".into(), format!("kernel z0=({}, {}, {})", field.source.t, field.source.x[0], field.source.v[0]));
    Ok(g)
}

fn harnack_pair(field: &KernelSolution, frame: Frame, cfg: &HarnackConfig, consts: &PaperConstants, calib: &Calibration) -> Result<(EstimateReport, EstimateReport)> {
    let g = harnack_grid(field, &frame, cfg.nodes)?;
    let set = Setting::new(&g).in_frame(frame).with_quadrature(Quadrature::Lattice([8, 8, 8]));
    let h = check_harnack(&set, calib.bound("harnack"))?;
    let w = check_weak_harnack(&set, cfg.zeta, consts, calib.bound(&format!("weak_harnack[zeta={}]", cfg.zeta)))?;
    Ok((h, w))
}

/// Harnack and weak Harnack on kernel solutions sourced before `t = −1`,
/// each also moved by a Galilean translation and by a kinetic scaling.
pub fn harnack_suite(cfg: &HarnackConfig, calib: &Calibration) -> Result<HarnackSuite> {
    let consts = paper_constants(1, 0.5, 0.5, 0.0, 0.25, 10.0)?;
    let one = ConstantField(1.0);
    let lattice = Setting::new(&one).with_quadrature(Quadrature::Lattice([8, 8, 8]));
    let constant_ratio = check_harnack(&lattice, None)?.empirical_constant.unwrap_or(f64::NAN);
    let weak_constant_lhs = check_weak_harnack(&lattice, 1.0, &consts, None)?.lhs;
    let weak_constant_expected = KineticCylinder::<1>::new(CylinderKind::TildePast { quarter: false }, PhasePoint::origin(), HARNACK_R0)?.volume();

    let ratio = |r: &EstimateReport| r.empirical_constant.unwrap_or(f64::NAN);
    let mut members = Vec::with_capacity(cfg.sources);
    for src in cfg.source_points() {
        let base = KernelSolution::new(src);
        let (harnack, weak) = harnack_pair(&base, Frame::default(), cfg, &consts, calib)?;
        let moved = Frame::new(cfg.translation, 1.0);
        let (ht, wt) = harnack_pair(&KernelSolution::new(moved.to_physical(&src)), moved, cfg, &consts, calib)?;
        let scaled = Frame::new(PhasePoint::origin(), cfg.scale);
        let (hs, ws) = harnack_pair(&KernelSolution::new(scaled.to_physical(&src)), scaled, cfg, &consts, calib)?;
        members.push(HarnackMember {
            source: src,
            harnack_translated: ratio(&ht),
            weak_translated: ratio(&wt),
            harnack_scaled: ratio(&hs),
            weak_scaled: ratio(&ws),
            harnack,
            weak,
        });
    }
    Ok(HarnackSuite { constant_ratio, weak_constant_lhs, weak_constant_expected, members })
}

/// One line of the kernel suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCheck {
    pub name: String,
    pub value: f64,
    pub target: String,
    pub pass: bool,
}

fn kernel_line(name: &str, value: f64, target: &str, pass: bool) -> KernelCheck {
    KernelCheck { name: name.into(), value, target: target.into(), pass }
}

/// Mass, PDE residual, negative control, semigroup and split-kernel checks.
pub fn kernel_suite() -> Result<Vec<KernelCheck>> {
    let q = KernelQuadrature::default();
    let mut out = Vec::new();
    for t in [0.01, 1.0, 100.0] {
        let m = kernel_mass(t, 1, &q, 1e-7)?;
        out.push(kernel_line(&format!("mass[t={t}]"), m, "|m - 1| <= 1e-6", (m - 1.0).abs() <= 1e-6));
    }
    let region = ResidualRegion::default();
    let r1 = kernel_pde_residual(&region, 0.01)?;
    let r2 = kernel_pde_residual(&region, 0.005)?;
    out.push(kernel_line("residual[h=0.01]", r1, "recorded", true));
    out.push(kernel_line("residual_ratio", r1 / r2, "[3.2, 4.8]", (3.2..=4.8).contains(&(r1 / r2))));
    let wrong = |t: f64, x: f64, v: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let u = x - 0.5 * t * v;
        (3.0f64).sqrt() / (2.0 * std::f64::consts::PI * t * t) * (-3.0 * u * u / t.powi(3) - v * v / (2.0 * t)).exp()
    };
    let bad = pde_residual_of(wrong, &region, 0.01)?;
    out.push(kernel_line("wrong_kernel_residual", bad, ">= 0.1 and >= 10x residual", bad >= 0.1 && bad >= 10.0 * r1));
    let qs = KernelQuadrature { nodes: 300, ..Default::default() };
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let s = k as f64;
        let (x, v) = (0.9 * (1.7 * s).sin(), 1.1 * (0.9 * s + 0.3).cos());
        worst = worst.max((propagate(0.5, |xp, vp| g1(0.5, xp, vp), x, v, &qs) - g1(1.0, x, v)).abs());
    }
    out.push(kernel_line("semigroup_max_error", worst, "<= 1e-4", worst <= 1e-4));
    for eps in [0.4, 0.1, 0.025] {
        let r = split_kernel(eps)?.near_mass(1.0, &q)? / eps.sqrt();
        out.push(kernel_line(&format!("near_mass_over_sqrt_eps[eps={eps}]"), r, "finite, < 2", r.is_finite() && r < 2.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enlarged_keeps_spacing_and_cfl() {
        let s = EnsembleSpec::default();
        let e = s.enlarged();
        assert!((e.grid.x.step() - s.grid.x.step()).abs() < 1e-15);
        assert!((e.grid.v.step() - s.grid.v.step()).abs() < 1e-15);
        assert_eq!((e.grid.x.lo, e.grid.v.hi), (-4.5, 5.625));
        assert!(e.grid.check().is_ok() && s.grid.check().is_ok() && s.refined().grid.check().is_ok());
    }

    #[test]
    fn bounding_box_covers_sheared_cylinder() {
        let c = KineticCylinder::centered(PhasePoint::new(0.0, [0.0], [1.0]), 1.0).unwrap();
        let b = bounding_box(&[c]);
        assert_eq!(b[0], (-1.0, 0.0));
        assert_eq!(b[1], (-2.0, 1.0));
        assert_eq!(b[2], (0.0, 2.0));
    }

    #[test]
    fn front_has_both_levels() {
        let f = front_datum(0.0, 1e-3);
        assert!((f(0.0, -0.1) + 0.1).abs() < 1e-12);
        assert_eq!(f(0.0, 0.1), 1.0);
    }
}
