//! One checker per quantitative statement.
//!
//! Every checker works in statement coordinates: cylinders are given as in
//! the statement (`Q_1`, `Q_{r0}^-`, ...) and the [`Setting`]'s frame maps
//! them onto the physical grid.

use serde::{Deserialize, Serialize};

use super::constants::{energy_constant, energy_constant_prime, energy_constant_second, PaperConstants};
use super::field::{CylinderSamples, Quadrature, Setting};
use super::norms::{fraction_of, gagliardo_of, lp_of, oscillation_of};
use super::report::{EstimateReport, RhsTerm};
use crate::error::{invalid, Result};
use crate::geometry::{CylinderKind, KineticCylinder, PhasePoint};

/// Radius of the Harnack statements.
pub const HARNACK_R0: f64 = 1.0 / 20.0;

/// Relative slack below which a negative sample still counts as zero.
const NEG_SLACK: f64 = 1e-9;

fn nested(qr: &KineticCylinder, qbig: &KineticCylinder) -> Result<(f64, f64, f64)> {
    let ok = qr.kind == CylinderKind::Centered && qbig.kind == CylinderKind::Centered && qr.center == qbig.center && qr.radius < qbig.radius;
    if !ok {
        return Err(invalid("expected concentric centred cylinders Q_r ⊂ Q_R with r < R"));
    }
    Ok((qr.radius, qbig.radius, qbig.center.v[0]))
}

fn min_max(s: &CylinderSamples) -> (f64, f64) {
    s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x.f), b.max(x.f)))
}

fn negative_part(s: &CylinderSamples) -> Option<f64> {
    let (lo, hi) = min_max(s);
    (lo < -NEG_SLACK * hi.abs().max(1.0)).then_some(lo)
}

fn s_sup(set: &Setting, s: &CylinderSamples) -> f64 {
    if set.coef.is_none() {
        return 0.0;
    }
    s.iter().map(|x| x.s.abs()).fold(0.0, f64::max)
}

fn s_l2(set: &Setting, s: &CylinderSamples) -> f64 {
    if set.coef.is_none() {
        return 0.0;
    }
    s.integrate(|x| x.s * x.s).sqrt()
}

fn describe(mut r: EstimateReport, cyls: &[(&str, &KineticCylinder)], set: &Setting) -> EstimateReport {
    for (role, c) in cyls {
        r = r.with_cylinder(role, c);
    }
    r.provenance.frame_scale = Some(set.frame.scale);
    if let Some(g) = set.f.grid() {
        r.provenance.grid = Some(g.shape());
        r.provenance.source = g.metadata.get("source").cloned();
    }
    r.provenance.seed = set.coef.and_then(|c| c.seed());
    r
}

/// `∫_{Q_r} |∇_v f|² ≲ 𝒞(r, R, v0) (∫_{Q_R} f² + ∫_{Q_R} f |S|)`.
pub fn check_energy_estimate(set: &Setting, qr: &KineticCylinder, qbig: &KineticCylinder, bound: Option<f64>) -> Result<EstimateReport> {
    let (r, big_r, v0) = nested(qr, qbig)?;
    let small = set.sample(qr)?;
    let big = set.sample(qbig)?;
    let id = "energy";
    if let Some(lo) = negative_part(&big) {
        return Ok(describe(EstimateReport::unmet(id, &format!("f is not non-negative (min {lo:e})")), &[("Q_r", qr), ("Q_R", qbig)], set));
    }
    let c = energy_constant(r, big_r, v0);
    let lhs = small.integrate(|s| s.dv * s.dv);
    let terms = vec![RhsTerm::new("C*int f^2", c * big.integrate(|s| s.f * s.f)), RhsTerm::new("C*int f|S|", c * big.integrate(|s| s.f.abs() * s.s.abs()))];
    let mut rep = EstimateReport::new(id, lhs, terms, bound).diag("C", c);
    rep.provenance.constants.insert("C".into(), c);
    Ok(describe(rep, &[("Q_r", qr), ("Q_R", qbig)], set))
}

/// `‖f‖_{L^p(Q_r)} ≲ (2 + 1/d − p)^{-1} 𝒞'(r, R, v0) [‖f‖_{L²(Q_R)} + ‖S‖_{L²(Q_R)}]`.
pub fn check_gain_integrability(set: &Setting, qr: &KineticCylinder, qbig: &KineticCylinder, p: f64, bound: Option<f64>) -> Result<EstimateReport> {
    let (r, big_r, v0) = nested(qr, qbig)?;
    if !(2.0..3.0).contains(&p) {
        return Err(invalid(format!("p must lie in [2, 2 + 1/d) = [2, 3), got {p}")));
    }
    let id = format!("gain_int[p={p}]");
    let small = set.sample(qr)?;
    let big = set.sample(qbig)?;
    if let Some(lo) = negative_part(&big) {
        return Ok(describe(EstimateReport::unmet(&id, &format!("f is not non-negative (min {lo:e})")), &[("Q_r", qr), ("Q_R", qbig)], set));
    }
    let k = energy_constant_prime(r, big_r, v0) / (3.0 - p);
    let lhs = lp_of(&small, p, |s| s.f);
    let terms = vec![RhsTerm::new("K*|f|_L2(Q_R)", k * lp_of(&big, 2.0, |s| s.f)), RhsTerm::new("K*|S|_L2(Q_R)", k * s_l2(set, &big))];
    let mut rep = EstimateReport::new(&id, lhs, terms, bound).diag("K", k);
    rep.provenance.constants.insert("C_prime".into(), energy_constant_prime(r, big_r, v0));
    Ok(describe(rep, &[("Q_r", qr), ("Q_R", qbig)], set))
}

/// `‖f‖_{L¹_{t,v} W^{σ,1}_x(Q_r)} ≲ (1/3 − σ)^{-1} 𝒞''(r, R, v0) [‖f‖_{L²(Q_R)} + ‖S‖_{L²(Q_R)}]`.
pub fn check_sobolev_gain(set: &Setting, qr: &KineticCylinder, qbig: &KineticCylinder, sigma: f64, bound: Option<f64>) -> Result<EstimateReport> {
    let (r, big_r, v0) = nested(qr, qbig)?;
    let id = format!("gain_reg[sigma={sigma}]");
    let small = set.sample(qr)?;
    let big = set.sample(qbig)?;
    let semi = gagliardo_of(&small, sigma)?;
    if let Some(lo) = negative_part(&big) {
        return Ok(describe(EstimateReport::unmet(&id, &format!("f is not non-negative (min {lo:e})")), &[("Q_r", qr), ("Q_R", qbig)], set));
    }
    let c2 = energy_constant_second(r, big_r, v0, 1);
    let k = c2 / (1.0 / 3.0 - sigma);
    let l1 = lp_of(&small, 1.0, |s| s.f);
    let terms = vec![RhsTerm::new("K*|f|_L2(Q_R)", k * lp_of(&big, 2.0, |s| s.f)), RhsTerm::new("K*|S|_L2(Q_R)", k * s_l2(set, &big))];
    let mut rep = EstimateReport::new(&id, semi + l1, terms, bound).diag("K", k).diag("seminorm", semi).diag("l1", l1);
    rep.provenance.constants.insert("C_second".into(), c2);
    Ok(describe(rep, &[("Q_r", qr), ("Q_R", qbig)], set))
}

/// `‖f‖_{L^∞(Q_r)} ≲ ((1 + |v0|)/(r²(R − r)³))^{(1+4d)/ζ} [‖f‖_{L^ζ(Q_R)} + ‖S‖_{L^∞(Q_R)}]`.
pub fn check_linfty_bound(set: &Setting, qr: &KineticCylinder, qbig: &KineticCylinder, zeta: f64, bound: Option<f64>) -> Result<EstimateReport> {
    let (r, big_r, v0) = nested(qr, qbig)?;
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(invalid(format!("zeta must be positive, got {zeta}")));
    }
    let id = format!("linfty[zeta={zeta}]");
    let small = set.sample(qr)?;
    let big = set.sample(qbig)?;
    if let Some(lo) = negative_part(&big) {
        return Ok(describe(EstimateReport::unmet(&id, &format!("f is not non-negative (min {lo:e})")), &[("Q_r", qr), ("Q_R", qbig)], set));
    }
    let factor = ((1.0 + v0.abs()) / (r * r * (big_r - r).powi(3))).powf(5.0 / zeta);
    let lhs = lp_of(&small, f64::INFINITY, |s| s.f);
    let terms = vec![RhsTerm::new("F*|f|_Lzeta(Q_R)", factor * lp_of(&big, zeta, |s| s.f)), RhsTerm::new("F*|S|_Linf(Q_R)", factor * s_sup(set, &big))];
    let rep = EstimateReport::new(&id, lhs, terms, bound).diag("factor", factor);
    Ok(describe(rep, &[("Q_r", qr), ("Q_R", qbig)], set))
}

/// `‖(f − ⟨f⟩_{Q_1^-})_+‖_{L¹(Q_1)} ≲ ε^{-(d+2)} ‖∇_v f‖_{L¹(Q_5)} + ε^σ (1/3 − σ)^{-1} ‖f‖_{L²(Q_5)} + ‖S‖_{L²(Q_5)}`.
pub fn check_weak_poincare(set: &Setting, eps: f64, sigma: f64, bound: Option<f64>) -> Result<EstimateReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if !(sigma > 0.0 && sigma < 1.0 / 3.0) {
        return Err(invalid(format!("sigma must lie in (0, 1/3), got {sigma}")));
    }
    let o = PhasePoint::origin();
    let q1 = KineticCylinder::centered(o, 1.0)?;
    let q1m = KineticCylinder::new(CylinderKind::Past, o, 1.0)?;
    let q5 = KineticCylinder::centered(o, 5.0)?;
    let id = format!("poincare[eps={eps}]");
    let s1 = set.sample(&q1)?;
    let sm = set.sample(&q1m)?;
    let s5 = set.sample(&q5)?;
    let cyls = [("Q_1", &q1), ("Q_1^-", &q1m), ("Q_5", &q5)];
    if let Some(lo) = negative_part(&s5) {
        return Ok(describe(EstimateReport::unmet(&id, &format!("f is not non-negative (min {lo:e})")), &cyls, set));
    }
    let mean = sm.integrate(|s| s.f) / sm.measure();
    let lhs = s1.integrate(|s| (s.f - mean).max(0.0));
    let terms = vec![
        RhsTerm::new("eps^-3*|dv f|_L1(Q_5)", eps.powi(-3) * lp_of(&s5, 1.0, |s| s.dv)),
        RhsTerm::new("eps^sigma/(1/3-sigma)*|f|_L2(Q_5)", eps.powf(sigma) / (1.0 / 3.0 - sigma) * lp_of(&s5, 2.0, |s| s.f)),
        RhsTerm::new("|S|_L2(Q_5)", s_l2(set, &s5)),
    ];
    let rep = EstimateReport::new(&id, lhs, terms, bound).diag("mean_Q1_minus", mean).diag("sigma", sigma);
    Ok(describe(rep, &cyls, set))
}

/// Which past cylinder the intermediate value lemma is tested with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IvlGeometry {
    /// `Q_{r0}^- = Q_{r0}((-2r0², 0, 0))`, with the time gap.
    Paper,
    /// `Q_{r0}((-r0², 0, 0))`, touching `Q_{r0}`.
    GapRemoved,
}

/// Intermediate value lemma. `band` moves the level `1 − θ` down by a
/// round-off margin, since `1 − θ` rounds to 1 in double precision; the
/// intermediate set shrinks accordingly, so its measured fraction stays a
/// lower bound.
pub fn check_ivl(set: &Setting, consts: &PaperConstants, geometry: IvlGeometry, band: f64) -> Result<EstimateReport> {
    let o = PhasePoint::origin();
    let r0 = consts.r0;
    let (d1, d2) = (consts.inputs.delta1, consts.inputs.delta2);
    let kind = match geometry {
        IvlGeometry::Paper => CylinderKind::Past,
        IvlGeometry::GapRemoved => CylinderKind::AdjacentPast,
    };
    let q_half = KineticCylinder::centered(o, 0.5)?;
    let q_minus = KineticCylinder::new(kind, o, r0)?;
    let q_r0 = KineticCylinder::centered(o, r0)?;
    let id = match geometry {
        IvlGeometry::Paper => "ivl",
        IvlGeometry::GapRemoved => "ivl[gap_removed]",
    };
    let cyls = [("Q_1/2", &q_half), ("Q_r0^-", &q_minus), ("Q_r0", &q_r0)];
    let (theta, nu) = (consts.theta(), consts.nu());
    let sh = set.sample(&q_half)?;
    let below = fraction_of(&set.sample(&q_minus)?, |f| f <= 0.0);
    let above = fraction_of(&set.sample(&q_r0)?, |f| f >= 1.0 - theta - band);
    let inter = fraction_of(&sh, |f| f > 0.0 && f < 1.0 - theta - band);
    let sup = min_max(&sh).1;
    let mut rep = if sup > 1.0 + band {
        EstimateReport::unmet(id, &format!("sup over Q_1/2 is {sup} > 1"))
    } else if below < d1 || above < d2 {
        EstimateReport::unmet(id, "level-set hypotheses do not hold")
    } else {
        // ν |Q_1/2| ≤ |{0 < f < 1 − θ} ∩ Q_1/2|, as a ratio against 1.
        EstimateReport::new(id, nu, vec![RhsTerm::new("intermediate_fraction", inter)], Some(1.0))
    };
    rep = rep.diag("fraction_below_0", below).diag("fraction_above_1_minus_theta", above).diag("intermediate_fraction", inter);
    rep = rep.diag("sup_Q_half", sup).diag("delta1", d1).diag("delta2", d2).diag("ln_theta", consts.ln_theta).diag("ln_nu", consts.ln_nu).diag("band", band);
    rep.provenance.constants.extend(consts.provenance().into_iter().map(|(k, v)| (k.to_string(), v)));
    Ok(describe(rep, &cyls, set))
}

/// Measure-to-pointwise bound: `f ≤ 1 − μ` on `Q_{r0/2}`.
pub fn check_measure_to_pointwise(set: &Setting, consts: &PaperConstants, tolerance: f64) -> Result<EstimateReport> {
    let o = PhasePoint::origin();
    let delta = consts.inputs.delta1;
    let r0 = if consts.inputs.s_inf == 0.0 { 1.0 / 20.0 } else { consts.r0_increase };
    let q_half = KineticCylinder::centered(o, 0.5)?;
    let q_minus = KineticCylinder::new(CylinderKind::Past, o, r0)?;
    let q_target = KineticCylinder::centered(o, r0 / 2.0)?;
    let cyls = [("Q_1/2", &q_half), ("Q_r0^-", &q_minus), ("Q_r0/2", &q_target)];
    let id = "measure_to_pointwise";
    let mu = consts.mu();
    let sup_half = min_max(&set.sample(&q_half)?).1;
    let below = fraction_of(&set.sample(&q_minus)?, |f| f <= 0.0);
    let s_inf = source_sup_q1(set)?;
    let sup = min_max(&set.sample(&q_target)?).1;
    let rep = if s_inf > mu {
        EstimateReport::unmet(id, &format!("|S|_inf = {s_inf:e} exceeds mu"))
    } else if sup_half > 1.0 + tolerance {
        EstimateReport::unmet(id, &format!("sup over Q_1/2 is {sup_half} > 1"))
    } else if below < delta {
        EstimateReport::unmet(id, "level-set hypothesis does not hold")
    } else {
        EstimateReport::new(id, sup, vec![RhsTerm::new("1-mu+tol", 1.0 - mu + tolerance)], Some(1.0)).decide(sup <= 1.0 - mu + tolerance)
    };
    let rep = rep.diag("sup_Q_r0_half", sup).diag("fraction_below_0", below).diag("delta", delta).diag("ln_neg_ln_mu", consts.ln_neg_ln_mu).diag("r0", r0);
    Ok(describe(rep, &cyls, set))
}

/// Weak Harnack inequality with measurement exponent `zeta`; the report
/// also carries the value for the explicit `ζ = δ0^{10d+17}` in log form and the
/// log-moment of the point-to-measure step.
pub fn check_weak_harnack(set: &Setting, zeta: f64, consts: &PaperConstants, bound: Option<f64>) -> Result<EstimateReport> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(invalid(format!("zeta must be positive, got {zeta}")));
    }
    let o = PhasePoint::origin();
    let r0 = HARNACK_R0;
    let q_tilde = KineticCylinder::new(CylinderKind::TildePast { quarter: false }, o, r0)?;
    let q_half = KineticCylinder::centered(o, r0 / 2.0)?;
    let q_minus = KineticCylinder::new(CylinderKind::Past, o, r0)?;
    let cyls = [("Q~^-_r0/2", &q_tilde), ("Q_r0/2", &q_half)];
    let st = set.sample(&q_tilde)?;
    let sh = set.sample(&q_half)?;
    for s in [&st, &sh] {
        if let Some(lo) = negative_part(s) {
            return Err(invalid(format!("f takes the negative value {lo:e}; not a non-negative super-solution")));
        }
    }
    let s_inf = source_sup_q1(set)?;
    let lhs = st.integrate(|s| s.f.max(0.0).powf(zeta)).powf(1.0 / zeta);
    let inf = min_max(&sh).0.max(0.0);
    let terms = vec![RhsTerm::new("inf_Q_r0/2 f", inf), RhsTerm::new("|S|_Linf(Q_1)", s_inf)];
    let id = format!("weak_harnack[zeta={zeta}]");
    let mut rep = EstimateReport::new(&id, lhs, terms, bound);

    // (∫ f^ζ)^{1/ζ} → |Q|^{1/ζ} exp(⟨ln f⟩) as ζ → 0; reported as a logarithm.
    let zp = consts.zeta();
    let mean_ln = st.integrate(|s| s.f.max(f64::MIN_POSITIVE).ln()) / st.measure();
    rep = rep.diag("ln_lhs_paper_zeta", st.measure().ln() / zp + mean_ln).diag("ln_paper_zeta", consts.ln_zeta);
    if set.f.grid().map_or(true, |g| g.check_inside(&set.frame.cylinder(&q_minus)).is_ok()) {
        let sm = set.sample(&q_minus)?;
        let h_scale = inf + s_inf;
        if h_scale > 0.0 {
            let moment = sm.integrate(|s| (s.f.max(0.0) / h_scale).ln_1p().powf(1.0 / 28.0));
            rep = rep.diag("log_moment_Q_r0_minus", moment);
        }
    }
    rep.provenance.constants.insert("r0".into(), r0);
    rep.provenance.constants.insert("zeta".into(), zeta);
    Ok(describe(rep, &cyls, set))
}

fn source_sup_q1(set: &Setting) -> Result<f64> {
    match set.coef {
        None => Ok(0.0),
        Some(c) if c.is_constant() => Ok(set.source_sup()),
        Some(_) => {
            let q1 = KineticCylinder::centered(PhasePoint::origin(), 1.0)?;
            Ok(s_sup(set, &set.sample(&q1)?))
        }
    }
}

/// Harnack inequality `sup_{Q̃^-_{r0/4}} f ≲ inf_{Q_{r0/4}} f + ‖S‖_{L^∞(Q_1)}`.
pub fn check_harnack(set: &Setting, bound: Option<f64>) -> Result<EstimateReport> {
    let o = PhasePoint::origin();
    let r0 = HARNACK_R0;
    let q_tilde = KineticCylinder::new(CylinderKind::TildePast { quarter: true }, o, r0)?;
    let q_quarter = KineticCylinder::centered(o, r0 / 4.0)?;
    let cyls = [("Q~^-_r0/4", &q_tilde), ("Q_r0/4", &q_quarter)];
    let st = set.sample(&q_tilde)?;
    let sq = set.sample(&q_quarter)?;
    for s in [&st, &sq] {
        if let Some(lo) = negative_part(s) {
            return Err(invalid(format!("f takes the negative value {lo:e}; not a non-negative solution")));
        }
    }
    let lhs = min_max(&st).1.max(0.0);
    let terms = vec![RhsTerm::new("inf_Q_r0/4 f", min_max(&sq).0.max(0.0)), RhsTerm::new("|S|_Linf(Q_1)", source_sup_q1(set)?)];
    let mut rep = EstimateReport::new("harnack", lhs, terms, bound);
    rep.provenance.constants.insert("r0".into(), r0);
    Ok(describe(rep, &cyls, set))
}

/// Oscillations of one center across the scales `r0^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationSeries {
    pub center: PhasePoint,
    pub radii: Vec<f64>,
    pub osc: Vec<f64>,
    pub alpha_hat: Option<f64>,
    /// `osc(Q_{r0}) ≤ (1 − μ/2) max(osc(Q_1), e^{…} ‖S‖)`.
    pub reduction_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationDecay {
    pub report: EstimateReport,
    pub series: Vec<OscillationSeries>,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Oscillation decay on `Q_{r0^n}(z0)`, `n = 0..=levels`, `r0 = 1/40`, for
/// each center `z0 ∈ Q_1`; `f` should solve the equation on `Q_2`.
///
/// Oscillations are taken over a lattice in each cylinder together with
/// every grid node inside it. Levels whose oscillation falls below
/// `noise_floor` are dropped from the fit.
pub fn check_oscillation_decay(set: &Setting, consts: &PaperConstants, centers: &[PhasePoint], levels: usize, noise_floor: f64) -> Result<OscillationDecay> {
    if levels == 0 || centers.is_empty() {
        return Err(invalid("need at least one level and one center"));
    }
    let r0 = consts.r0_holder;
    let o = PhasePoint::origin();
    let q1 = KineticCylinder::centered(o, 1.0)?;
    let q2 = KineticCylinder::centered(o, 2.0)?;
    if centers.iter().any(|c| !q1.contains(c)) {
        return Err(invalid("oscillation centers must lie in Q_1"));
    }
    let s_inf = match set.coef {
        None => 0.0,
        Some(c) if c.is_constant() => set.source_sup(),
        Some(_) => s_sup(set, &set.sample(&q2)?),
    };
    let lattice = Setting { quadrature: Quadrature::Lattice([12, 12, 12]), ..*set };
    let nodes = Setting { quadrature: Quadrature::CellCenters, ..*set };
    let osc_on = |q: &KineticCylinder| -> Result<f64> {
        let a = lattice.sample(q)?;
        let (mut lo, mut hi) = min_max(&a);
        if set.f.grid().is_some() {
            if let Ok(b) = nodes.sample(q) {
                let (l, h) = min_max(&b);
                lo = lo.min(l);
                hi = hi.max(h);
            }
        }
        Ok(hi - lo)
    };
    let mut series = Vec::with_capacity(centers.len());
    let mut notes = Vec::new();
    for c in centers {
        let mut radii = Vec::new();
        let mut osc = Vec::new();
        for n in 0..=levels {
            let r = r0.powi(n as i32);
            radii.push(r);
            osc.push(osc_on(&KineticCylinder::centered(*c, r)?)?);
        }
        let reduction_holds = osc[1] <= consts.reduced_oscillation(osc[0], s_inf);
        let kept: Vec<usize> = (0..osc.len()).take_while(|&i| osc[i] > noise_floor).collect();
        if kept.len() < osc.len() {
            notes.push(format!("center ({}, {}, {}): levels from {} below the noise floor", c.t, c.x[0], c.v[0], kept.len()));
        }
        let alpha_hat = (kept.len() >= 2).then(|| {
            let xs: Vec<f64> = kept.iter().map(|&i| radii[i].ln()).collect();
            let ys: Vec<f64> = kept.iter().map(|&i| osc[i].ln()).collect();
            slope(&xs, &ys)
        });
        series.push(OscillationSeries { center: *c, radii, osc, alpha_hat, reduction_holds });
    }
    let worst = series.iter().map(|s| s.osc[1]).fold(0.0, f64::max);
    let all_hold = series.iter().all(|s| s.reduction_holds);
    let alpha_min = series.iter().filter_map(|s| s.alpha_hat).fold(f64::INFINITY, f64::min);
    let mut rep = EstimateReport::new("oscillation_decay", worst, vec![RhsTerm::new("(1-mu/2)*max(osc_Q1, e^K |S|)", series.iter().map(|s| consts.reduced_oscillation(s.osc[0], s_inf)).fold(0.0, f64::max))], None).decide(all_hold);
    if alpha_min.is_finite() {
        rep = rep.diag("alpha_hat_min", alpha_min);
    }
    let ratio = series.iter().filter(|s| s.osc[0] > 0.0).map(|s| s.osc[1] / s.osc[0]).fold(0.0, f64::max);
    rep = rep.diag("osc_ratio_max", ratio);
    rep = rep.diag("ln_neg_ln_alpha_paper", consts.ln_neg_ln_alpha).diag("S_inf_Q2", s_inf).diag("r0", r0);
    rep.notes.extend(notes);
    rep.provenance.constants.extend(consts.provenance().into_iter().map(|(k, v)| (k.to_string(), v)));
    Ok(OscillationDecay { report: describe(rep, &[("Q_1", &q1), ("Q_2", &q2)], set), series })
}

/// Oscillation over a single cylinder.
pub fn oscillation(set: &Setting, q: &KineticCylinder) -> Result<f64> {
    Ok(oscillation_of(&set.sample(q)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::constants::paper_constants;
    use crate::estimates::field::ConstantField;
    use crate::estimates::report::Status;

    fn unit() -> (KineticCylinder, KineticCylinder) {
        let o = PhasePoint::origin();
        (KineticCylinder::centered(o, 0.5).unwrap(), KineticCylinder::centered(o, 1.0).unwrap())
    }

    #[test]
    fn constants_give_zero_gradient_terms() {
        let f = ConstantField(2.0);
        let set = Setting::new(&f).with_quadrature(Quadrature::Lattice([8, 8, 8]));
        let (qr, qb) = unit();
        let e = check_energy_estimate(&set, &qr, &qb, Some(1.0)).unwrap();
        assert_eq!((e.lhs, e.status), (0.0, Status::Pass));
        let p = check_weak_poincare(&set, 0.5, 0.25, Some(1.0)).unwrap();
        assert_eq!(p.lhs, 0.0);
        let s = check_sobolev_gain(&set, &qr, &qb, 0.25, None).unwrap();
        assert_eq!(s.diagnostics["seminorm"], 0.0);
    }

    #[test]
    fn linfty_of_one() {
        let f = ConstantField(1.0);
        let set = Setting::new(&f).with_quadrature(Quadrature::Lattice([4, 4, 4]));
        let (qr, qb) = unit();
        let r = check_linfty_bound(&set, &qr, &qb, 2.0, Some(1.0)).unwrap();
        assert_eq!(r.lhs, 1.0);
        let factor = (1.0f64 / (0.25 * 0.125)).powf(2.5);
        assert!((r.rhs - factor * 2.0).abs() < 1e-9 * r.rhs);
        assert!(r.passed());
    }

    #[test]
    fn rejects_non_nested() {
        let f = ConstantField(1.0);
        let set = Setting::new(&f).with_quadrature(Quadrature::Lattice([4, 4, 4]));
        let (qr, qb) = unit();
        assert!(check_energy_estimate(&set, &qb, &qr, None).is_err());
        assert!(check_gain_integrability(&set, &qr, &qb, 3.0, None).is_err());
    }

    #[test]
    fn half_value_fails_ivl_hypotheses() {
        let f = ConstantField(0.5);
        let set = Setting::new(&f).with_quadrature(Quadrature::Lattice([4, 4, 4]));
        let c = paper_constants(1, 0.5, 0.5, 0.0, 0.25, 10.0).unwrap();
        let r = check_ivl(&set, &c, IvlGeometry::Paper, 0.0).unwrap();
        assert_eq!(r.status, Status::HypothesesUnmet);
        let m = check_measure_to_pointwise(&Setting::new(&ConstantField(0.0)).with_quadrature(Quadrature::Lattice([4, 4, 4])), &c, 0.0).unwrap();
        assert_eq!(m.status, Status::Pass);
    }

    #[test]
    fn harnack_of_constant() {
        let f = ConstantField(3.0);
        let set = Setting::new(&f).with_quadrature(Quadrature::Lattice([4, 4, 4]));
        let r = check_harnack(&set, Some(1.0)).unwrap();
        assert_eq!(r.empirical_constant, Some(1.0));
        let c = paper_constants(1, 0.5, 0.5, 0.0, 0.25, 10.0).unwrap();
        let w = check_weak_harnack(&set, 1.0, &c, None).unwrap();
        let vol = 4.0 / 40f64.powi(6);
        assert!((w.lhs / 3.0 - vol).abs() < 1e-12 * vol);
    }
}
