//! Norms, level-set measures and seminorms over sampled cylinders.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{CylinderSamples, Sample, Setting};
use crate::error::{invalid, Result};
use crate::geometry::KineticCylinder;
use crate::solver::grid::GridFunction;

/// `(Σ w |f|^p)^{1/p}`, or `max |f|` for `p = ∞`.
pub fn lp_of(s: &CylinderSamples, p: f64, g: impl Fn(&Sample) -> f64) -> f64 {
    if p.is_infinite() {
        return s.iter().map(|x| g(x).abs()).fold(0.0, f64::max);
    }
    s.integrate(|x| g(x).abs().powf(p)).powf(1.0 / p)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) {
        return Err(invalid(format!("exponent must lie in (0, ∞], got {p}")));
    }
    Ok(())
}

/// `‖f‖_{L^p(Q)}`.
pub fn lp_norm(set: &Setting, q: &KineticCylinder, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_of(&set.sample(q)?, p, |s| s.f))
}

/// Norm over every node of a grid.
pub fn grid_lp_norm(g: &GridFunction, p: f64) -> f64 {
    if p.is_infinite() {
        return g.data.iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    (g.data.iter().map(|v| v.abs().powf(p)).sum::<f64>() * g.cell_volume()).powf(1.0 / p)
}

/// Trapezoid rule in the cylinder's own coordinates, `n` nodes per axis.
/// An independent quadrature used to cross-check [`lp_norm`].
pub fn trapezoid_lp_norm(set: &Setting, q: &KineticCylinder, p: f64, n: usize) -> Result<f64> {
    check_p(p)?;
    if n < 2 {
        return Err(invalid("trapezoid rule needs at least two nodes per axis"));
    }
    let node = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let wt = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let total: f64 = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let s = node(q.t_lo, q.t_hi, i);
            let w = node(-q.rv, q.rv, j);
            (0..n)
                .map(|m| {
                    let y = node(-q.rx, q.rx, m);
                    let zp = set.frame.to_physical(&q.from_local(s, [y], [w]));
                    wt(i) * wt(j) * wt(m) * set.f.value(&zp).abs().powf(p)
                })
                .sum::<f64>()
        })
        .sum();
    let h = (q.t_hi - q.t_lo) * (2.0 * q.rx) * (2.0 * q.rv) / ((n - 1) as f64).powi(3);
    Ok((total * h).powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    Below,
    AtLeast,
    Above,
}

impl Relation {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => value <= threshold,
            Relation::Below => value < threshold,
            Relation::AtLeast => value >= threshold,
            Relation::Above => value > threshold,
        }
    }
}

pub fn fraction_of(s: &CylinderSamples, pred: impl Fn(f64) -> bool) -> f64 {
    s.iter().filter(|x| pred(x.f)).count() as f64 / s.len() as f64
}

/// Fraction of quadrature nodes of `Q` where `f relation threshold`.
pub fn level_set_fraction(set: &Setting, q: &KineticCylinder, relation: Relation, threshold: f64) -> Result<f64> {
    Ok(fraction_of(&set.sample(q)?, |f| relation.holds(f, threshold)))
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 1.0 / 3.0) {
        return Err(invalid(format!("sigma must lie in (0, 1/3), got {sigma}")));
    }
    Ok(())
}

/// `∫_{t,v} ∫∫ |f(x) − f(x')| / |x − x'|^{1+σ} dx dx'` over the x-sections
/// of the sampled cylinder.
///
/// Cell pairs are weighted by the exact integral of `|x − x'|^{−σ}` over the
/// two cells, which makes the sum exact for data affine in `x`.
pub fn gagliardo_of(s: &CylinderSamples, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if s.lines.iter().map(|l| l.samples.len()).max().unwrap_or(0) < 4 {
        return Err(invalid("fewer than four x-cells in the cylinder"));
    }
    let psi = |k: f64| k.abs().powf(2.0 - sigma) / ((1.0 - sigma) * (2.0 - sigma));
    let total: f64 = s
        .lines
        .par_iter()
        .map(|line| {
            let n = line.samples.len();
            let h = line.dx;
            let scale = h.powf(2.0 - sigma);
            let f: Vec<f64> = line.samples.iter().map(|x| x.f).collect();
            let pair: Vec<f64> = (0..n)
                .map(|k| {
                    let k = k as f64;
                    scale * (psi(k + 1.0) - 2.0 * psi(k) + psi(k - 1.0))
                })
                .collect();
            let mut acc = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let k = j - i;
                    acc += 2.0 * (f[i] - f[j]).abs() / (k as f64 * h) * pair[k];
                }
                if n > 1 {
                    let slope = if i == 0 {
                        (f[1] - f[0]) / h
                    } else if i == n - 1 {
                        (f[n - 1] - f[n - 2]) / h
                    } else {
                        (f[i + 1] - f[i - 1]) / (2.0 * h)
                    };
                    acc += slope.abs() * pair[0];
                }
            }
            // Measure in (t, v) carried by this line.
            acc / h
        })
        .sum();
    Ok(total * s.weight)
}

pub fn gagliardo_x_seminorm(set: &Setting, q: &KineticCylinder, sigma: f64) -> Result<f64> {
    gagliardo_of(&set.sample(q)?, sigma)
}

/// At most `cap` samples, evenly decimated.
pub fn decimate(s: &CylinderSamples, cap: usize) -> Vec<Sample> {
    let all: Vec<Sample> = s.iter().copied().collect();
    if all.len() <= cap {
        return all;
    }
    let stride = all.len().div_ceil(cap);
    all.into_iter().step_by(stride).collect()
}

/// `max |f(z1) − f(z2)| / |z1 − z2|^α` over pairs at Euclidean distance at
/// least `min_sep`.
pub fn holder_of(points: &[Sample], alpha: f64, min_sep: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let (best, pairs) = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            let mut pairs = 0usize;
            for j in (i + 1)..points.len() {
                let d = points[i].z.euclidean_distance(&points[j].z);
                if d >= min_sep && d > 0.0 {
                    pairs += 1;
                    best = best.max((points[i].f - points[j].f).abs() / d.powf(alpha));
                }
            }
            (best, pairs)
        })
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
    if pairs == 0 {
        return Err(invalid("no admissible point pairs at the requested separation"));
    }
    Ok(best)
}

/// Hölder seminorm on a decimated sublattice of at most `10⁴` nodes.
/// `min_sep` must be at least twice the largest grid step.
pub fn holder_seminorm(set: &Setting, q: &KineticCylinder, alpha: f64, min_sep: f64) -> Result<f64> {
    if let Some(g) = set.f.grid() {
        let h = g.steps().iter().fold(0.0f64, |m, s| m.max(*s)) / set.frame.scale;
        if min_sep < 2.0 * h {
            return Err(invalid("separation below twice the grid step"));
        }
    }
    holder_of(&decimate(&set.sample(q)?, 10_000), alpha, min_sep)
}

/// `max f − min f` over the samples.
pub fn oscillation_of(s: &CylinderSamples) -> f64 {
    let (lo, hi) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x.f), b.max(x.f)));
    hi - lo
}
