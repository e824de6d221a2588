//! Renormalized weak formulation, tested against a finite family of bumps
//! `φ` and convex nondecreasing `β`.
//!
//! For a sub-solution every pair must give
//! `−∫ β(f) 𝒯φ + ∫ A ∂_vβ(f) ∂_vφ − ∫ (B ∂_vβ(f) + S β'(f)) φ ≤ 0`.
//! The discrete value is divided by `∫ φ` so that one tolerance serves all
//! bump sizes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coefficients::{CoefficientField, Coefficients};
use super::grid::GridFunction;
use crate::error::{invalid, Result};
use crate::geometry::PhasePoint;

/// Tensor bump `Π b((y_k − c_k)/w_k)` with `b(s) = exp(−1/(1 − s²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 3],
    pub width: [f64; 3],
}

fn bump1(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let b = (-1.0 / q).exp();
    (b, b * (-2.0 * s / (q * q)))
}

impl Bump {
    /// `(φ, ∂_tφ, ∂_xφ, ∂_vφ)`.
    pub fn eval(&self, t: f64, x: f64, v: f64) -> [f64; 4] {
        let y = [t, x, v];
        let mut b = [(0.0, 0.0); 3];
        for k in 0..3 {
            let (p, dp) = bump1((y[k] - self.center[k]) / self.width[k]);
            b[k] = (p, dp / self.width[k]);
        }
        [b[0].0 * b[1].0 * b[2].0, b[0].1 * b[1].0 * b[2].0, b[0].0 * b[1].1 * b[2].0, b[0].0 * b[1].0 * b[2].1]
    }
}

/// `β(s) = η log(1 + e^{(s − c)/η})`, a smoothed `(s − c)_+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hinge {
    pub threshold: f64,
    pub width: f64,
}

impl Hinge {
    pub fn beta(&self, s: f64) -> f64 {
        let u = (s - self.threshold) / self.width;
        self.width * if u > 0.0 { u + (-u).exp().ln_1p() } else { u.exp().ln_1p() }
    }

    pub fn beta_prime(&self, s: f64) -> f64 {
        let u = (s - self.threshold) / self.width;
        1.0 / (1.0 + (-u).exp())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakTestBasis {
    pub bumps: Vec<Bump>,
    pub hinges: Vec<Hinge>,
}

impl WeakTestBasis {
    pub fn new(bumps: Vec<Bump>, hinges: Vec<Hinge>) -> Result<Self> {
        if bumps.is_empty() || hinges.is_empty() {
            return Err(invalid("test basis needs at least one bump and one renormalization"));
        }
        if bumps.iter().any(|b| b.width.iter().any(|w| !(*w > 0.0))) || hinges.iter().any(|h| !(h.width > 0.0)) {
            return Err(invalid("bump and hinge widths must be positive"));
        }
        Ok(Self { bumps, hinges })
    }

    /// `n_t × n_x × n_v` overlapping bumps tiling `region`, and hinges at five
    /// thresholds across `range` with three smoothing widths.
    pub fn tiled(region: [(f64, f64); 3], per_axis: [usize; 3], range: (f64, f64)) -> Result<Self> {
        let mut bumps = Vec::new();
        let len: Vec<f64> = (0..3).map(|k| (region[k].1 - region[k].0) / per_axis[k] as f64).collect();
        for i in 0..per_axis[0] {
            for j in 0..per_axis[1] {
                for k in 0..per_axis[2] {
                    let idx = [i, j, k];
                    let mut center = [0.0; 3];
                    let mut width = [0.0; 3];
                    for a in 0..3 {
                        center[a] = region[a].0 + (idx[a] as f64 + 0.5) * len[a];
                        width[a] = 0.5 * len[a];
                    }
                    bumps.push(Bump { center, width });
                }
            }
        }
        let span = if range.1 > range.0 { range.1 - range.0 } else { 1.0 };
        let mut hinges = Vec::new();
        for q in 1..=5 {
            for w in [0.25, 0.05, 0.01] {
                hinges.push(Hinge { threshold: range.0 + span * q as f64 / 6.0, width: w * span });
            }
        }
        Self::new(bumps, hinges)
    }
}

/// `C_tol (Δt + Δx² + Δv²)`.
pub fn tolerance_grid(steps: [f64; 3], c_tol: f64) -> f64 {
    c_tol * (steps[0] + steps[1] * steps[1] + steps[2] * steps[2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    /// Largest normalized residual over all pairs.
    pub max: f64,
    pub bump: usize,
    pub hinge: usize,
}

/// Residual of `f` tested as a sub-solution.
pub fn weak_subsolution_residual(f: &GridFunction, coef: &CoefficientField, basis: &WeakTestBasis) -> Result<WeakResidual> {
    residual(f, coef, basis, 1.0)
}

/// Residual of `−f` as a sub-solution with source `−S`, i.e. of `f` tested
/// as a super-solution.
pub fn weak_supersolution_residual(f: &GridFunction, coef: &CoefficientField, basis: &WeakTestBasis) -> Result<WeakResidual> {
    residual(f, coef, basis, -1.0)
}

fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

fn residual(f: &GridFunction, coef: &CoefficientField, basis: &WeakTestBasis, sign: f64) -> Result<WeakResidual> {
    let per_bump = residual_table(f, coef, basis, sign)?;
    let mut best = WeakResidual { max: f64::NEG_INFINITY, bump: 0, hinge: 0 };
    for (bi, row) in per_bump.iter().enumerate() {
        for (hi, &r) in row.iter().enumerate() {
            if r > best.max {
                best = WeakResidual { max: r, bump: bi, hinge: hi };
            }
        }
    }
    Ok(best)
}

/// Normalized residual of every `(bump, hinge)` pair, indexed
/// `[bump][hinge]`; `sign = −1` tests `f` as a super-solution.
pub fn residual_table(f: &GridFunction, coef: &CoefficientField, basis: &WeakTestBasis, sign: f64) -> Result<Vec<Vec<f64>>> {
    let [at, ax, av] = f.axes;
    for b in &basis.bumps {
        for (k, a) in [at, ax, av].iter().enumerate() {
            if b.center[k] - b.width[k] < a.lo || b.center[k] + b.width[k] > a.hi {
                return Err(invalid(format!("test function centred at {:?} leaves the grid box", b.center)));
            }
        }
    }
    let [_, _, dv] = f.steps();
    // Thresholds refer to values of `f`; the sign-flipped test acts on `−f`.
    let hinges: Vec<Hinge> = basis.hinges.iter().map(|h| Hinge { threshold: sign * h.threshold, width: h.width }).collect();
    let nh = hinges.len();

    // Node ranges covering every bump, with one extra v-node for upwinding.
    let range = |a: &super::grid::Axis, k: usize| {
        let lo = basis.bumps.iter().map(|b| b.center[k] - b.width[k]).fold(f64::INFINITY, f64::min);
        let hi = basis.bumps.iter().map(|b| b.center[k] + b.width[k]).fold(f64::NEG_INFINITY, f64::max);
        a.nodes_in_open(0.5 * (lo + hi), 0.5 * (hi - lo))
    };
    let (rt, rx) = (range(&at, 0), range(&ax, 1));
    let rv = {
        let r = range(&av, 2);
        r.start.saturating_sub(1)..(r.end + 1).min(av.n)
    };
    let (nx, nv) = (rx.len(), rv.len());
    let table: Vec<Coefficients> = (0..rt.len() * nx * nv)
        .into_par_iter()
        .map(|k| {
            let (it, ix, iv) = (rt.start + k / (nx * nv), rx.start + (k / nv) % nx, rv.start + k % nv);
            coef.at(&f.node(it, ix, iv))
        })
        .collect();
    let coef_at = |it: usize, ix: usize, iv: usize| table[((it - rt.start) * nx + (ix - rx.start)) * nv + (iv - rv.start)];

    let per_bump: Vec<Vec<f64>> = basis
        .bumps
        .par_iter()
        .map(|b| {
            let ts = at.nodes_in_open(b.center[0], b.width[0]);
            let xs = ax.nodes_in_open(b.center[1], b.width[1]);
            let vs = av.nodes_in_open(b.center[2], b.width[2]);
            let mut acc = vec![0.0; nh];
            let mut mass = 0.0;
            let mut beta = vec![0.0; nh];
            for it in ts {
                let t = at.node(it);
                for ix in xs.clone() {
                    let x = ax.node(ix);
                    let g = |iv: usize| sign * f.at(it, ix, iv);
                    for iv in vs.start.saturating_sub(1)..vs.end {
                        let v = av.node(iv);
                        let c = coef_at(it, ix, iv);
                        let fi = g(iv);
                        for (h, hinge) in hinges.iter().enumerate() {
                            beta[h] = hinge.beta(fi);
                        }
                        // Face to the right: flux A ∂_vβ against ∂_vφ at the face.
                        if iv + 1 < av.n {
                            let dphi = b.eval(t, x, v + 0.5 * dv)[3];
                            if dphi != 0.0 {
                                let af = harmonic(c.a, coef_at(it, ix, iv + 1).a);
                                let fr = g(iv + 1);
                                for (h, hinge) in hinges.iter().enumerate() {
                                    acc[h] += af * (hinge.beta(fr) - beta[h]) / dv * dphi;
                                }
                            }
                        }
                        if !vs.contains(&iv) {
                            continue;
                        }
                        let [phi, pt, px, _] = b.eval(t, x, v);
                        mass += phi;
                        let tphi = pt + v * px;
                        let s = sign * c.s;
                        // Upwind neighbour used by the scheme for the drift.
                        let nb = if c.b > 0.0 && iv + 1 < av.n {
                            Some((iv + 1, 1.0))
                        } else if c.b < 0.0 && iv > 0 {
                            Some((iv - 1, -1.0))
                        } else {
                            None
                        };
                        for (h, hinge) in hinges.iter().enumerate() {
                            let mut r = -beta[h] * tphi - s * hinge.beta_prime(fi) * phi;
                            if let Some((j, dir)) = nb {
                                r -= c.b * dir * (hinge.beta(g(j)) - beta[h]) / dv * phi;
                            }
                            acc[h] += r;
                        }
                    }
                }
            }
            if mass > 0.0 {
                acc.iter_mut().for_each(|a| *a /= mass);
            }
            acc
        })
        .collect();
    Ok(per_bump)
}

/// Point helper for tests and diagnostics.
pub fn bump_value(b: &Bump, z: &PhasePoint) -> f64 {
    b.eval(z.t, z.x[0], z.v[0])[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hinge_is_convex_and_monotone() {
        let h = Hinge { threshold: 0.3, width: 0.05 };
        let mut prev = (h.beta(-1.0), h.beta_prime(-1.0));
        for i in 1..200 {
            let s = -1.0 + i as f64 * 0.01;
            let cur = (h.beta(s), h.beta_prime(s));
            assert!(cur.0 >= prev.0 && cur.1 >= prev.1);
            prev = cur;
        }
        assert!((h.beta(2.0) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn bump_derivative_matches_difference() {
        let b = Bump { center: [0.0, 0.1, -0.2], width: [0.5, 0.4, 0.3] };
        let e = 1e-6;
        let [_, pt, px, pv] = b.eval(0.1, 0.2, -0.1);
        let fd = |d: [f64; 3]| (b.eval(0.1 + d[0], 0.2 + d[1], -0.1 + d[2])[0] - b.eval(0.1 - d[0], 0.2 - d[1], -0.1 - d[2])[0]) / (2.0 * e);
        assert!((pt - fd([e, 0.0, 0.0])).abs() < 1e-6);
        assert!((px - fd([0.0, e, 0.0])).abs() < 1e-6);
        assert!((pv - fd([0.0, 0.0, e])).abs() < 1e-6);
    }
}
