//! Kolmogorov's fundamental solution of `∂_t + v·∇_x − Δ_v` and the group
//! convolution built from it.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::estimates::norms::grid_lp_norm;
use crate::estimates::report::{EstimateReport, RhsTerm};
use crate::geometry::PhasePoint;
use crate::solver::grid::GridFunction;

const UNDERFLOW: f64 = -700.0;

/// `G(t, x, v)` for `t > 0`, zero otherwise.
pub fn kolmogorov_g<const D: usize>(t: f64, x: &[f64; D], v: &[f64; D]) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let mut e = 0.0;
    for i in 0..D {
        let u = x[i] - 0.5 * t * v[i];
        e -= 3.0 * u * u / (t * t * t) + v[i] * v[i] / (4.0 * t);
    }
    if e < UNDERFLOW {
        return 0.0;
    }
    (3.0 / (4.0 * PI * PI * t.powi(4))).powf(D as f64 / 2.0) * e.exp()
}

/// One-dimensional shorthand.
pub fn g1(t: f64, x: f64, v: f64) -> f64 {
    kolmogorov_g(t, &[x], &[v])
}

/// Analytic `(∇_x G, ∇_v G)`.
pub fn kernel_gradients<const D: usize>(t: f64, x: &[f64; D], v: &[f64; D]) -> Result<([f64; D], [f64; D])> {
    if !(t > 0.0) {
        return Err(invalid(format!("kernel gradients need t > 0, got {t}")));
    }
    let g = kolmogorov_g(t, x, v);
    let mut gx = [0.0; D];
    let mut gv = [0.0; D];
    for i in 0..D {
        let u = x[i] - 0.5 * t * v[i];
        gx[i] = -g * 6.0 * u / (t * t * t);
        gv[i] = g * (3.0 * u / (t * t) - v[i] / (2.0 * t));
    }
    Ok((gx, gv))
}

/// Panel counts for the kernel quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuadrature {
    /// Half-width of the integration window in standard deviations.
    pub sigmas: f64,
    /// Midpoint nodes per spatial axis for whole-kernel integrals.
    pub nodes: usize,
    /// Nodes per standard deviation (or per source cell) in convolutions.
    pub density: f64,
    /// Midpoint nodes per dyadic time panel.
    pub time_nodes: usize,
    /// Time panels stop refining below this fraction of the time span.
    pub min_panel: f64,
}

impl Default for KernelQuadrature {
    fn default() -> Self {
        Self { sigmas: 8.0, nodes: 400, density: 3.0, time_nodes: 4, min_panel: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelParams {
    pub d: usize,
    pub epsilon: Option<f64>,
    pub quadrature: KernelQuadrature,
}

impl KernelParams {
    pub fn new(d: usize, epsilon: Option<f64>) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if let Some(e) = epsilon {
            check_epsilon(e)?;
        }
        Ok(Self { d, epsilon, quadrature: KernelQuadrature::default() })
    }
}

fn midpoint(lo: f64, hi: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let h = (hi - lo) / n as f64;
    (0..n).map(|i| f(lo + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

fn mass_1d(t: f64, k: f64, n: usize) -> f64 {
    // Adapted variables u = x - t v / 2 and v have unit Jacobian.
    let su = (t.powi(3) / 6.0).sqrt();
    let sv = (2.0 * t).sqrt();
    midpoint(-k * sv, k * sv, n, |v| midpoint(-k * su, k * su, n, |u| g1(t, u + 0.5 * t * v, v)))
}

/// `∫∫ G(t, x, v) dx dv` by midpoint quadrature on the window
/// `|v| ≤ k √(2t)`, `|x − t v / 2| ≤ k √(t³/6)`.
///
/// The same integral on a window 1.5 times wider is used as a truncation
/// check; a disagreement above `tol` is reported as insufficient quadrature.
pub fn kernel_mass(t: f64, d: usize, q: &KernelQuadrature, tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("kernel mass needs t > 0, got {t}")));
    }
    // G factorizes over coordinates, so the d-dimensional mass is a power of the 1-d one.
    let m = mass_1d(t, q.sigmas, q.nodes).powi(d as i32);
    let wide = mass_1d(t, 1.5 * q.sigmas, (1.5 * q.nodes as f64) as usize).powi(d as i32);
    let deficit = (wide - m).abs();
    if deficit > tol {
        return Err(Error::QuadratureInsufficient { deficit, tolerance: tol });
    }
    Ok(m)
}

/// Evaluation box for the PDE residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRegion {
    pub t: (f64, f64),
    pub x: (f64, f64),
    pub v: (f64, f64),
    pub points: usize,
}

impl Default for ResidualRegion {
    fn default() -> Self {
        Self { t: (0.5, 1.0), x: (-1.0, 1.0), v: (-1.0, 1.0), points: 21 }
    }
}

/// `max |∂_t g + v ∂_x g − ∂_vv g|` over the region, with centered
/// differences of step `h`.
pub fn pde_residual_of(g: impl Fn(f64, f64, f64) -> f64 + Sync, region: &ResidualRegion, h: f64) -> Result<f64> {
    if region.t.0 < 0.1 {
        return Err(invalid("residual region must stay at t ≥ 0.1"));
    }
    let n = region.points.max(2);
    let at = |r: (f64, f64), i: usize| r.0 + (r.1 - r.0) * i as f64 / (n - 1) as f64;
    let worst = (0..n * n * n)
        .into_par_iter()
        .map(|k| {
            let (t, x, v) = (at(region.t, k / (n * n)), at(region.x, (k / n) % n), at(region.v, k % n));
            let dt = (g(t + h, x, v) - g(t - h, x, v)) / (2.0 * h);
            let dx = (g(t, x + h, v) - g(t, x - h, v)) / (2.0 * h);
            let dvv = (g(t, x, v + h) - 2.0 * g(t, x, v) + g(t, x, v - h)) / (h * h);
            (dt + v * dx - dvv).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

pub fn kernel_pde_residual(region: &ResidualRegion, h: f64) -> Result<f64> {
    pde_residual_of(g1, region, h)
}

/// Smooth cutoff equal to 1 on `(-∞, 1]` and 0 on `[2, ∞)`.
pub fn cutoff(u: f64) -> f64 {
    fn psi(s: f64) -> f64 {
        if s > 0.0 {
            (-1.0 / s).exp()
        } else {
            0.0
        }
    }
    if u <= 1.0 {
        return 1.0;
    }
    if u >= 2.0 {
        return 0.0;
    }
    let a = psi(2.0 - u);
    a / (a + psi(u - 1.0))
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("splitting scale must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// The short-time and long-time parts `G = G_ε + G_ε^⊥`.
#[derive(Debug, Clone, Copy)]
pub struct SplitKernel {
    pub eps: f64,
}

impl SplitKernel {
    pub fn near(&self, t: f64, x: f64, v: f64) -> f64 {
        cutoff(t / self.eps) * g1(t, x, v)
    }

    pub fn far(&self, t: f64, x: f64, v: f64) -> f64 {
        g1(t, x, v) - self.near(t, x, v)
    }

    /// `∫_0^τ ∫∫ |G_ε|`, using unit mass of `G(t, ·)` at every time.
    pub fn near_mass(&self, tau: f64, q: &KernelQuadrature) -> Result<f64> {
        let hi = tau.min(2.0 * self.eps);
        let n = 200;
        let h = hi / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let t = (i as f64 + 0.5) * h;
            s += cutoff(t / self.eps) * kernel_mass(t, 1, q, 1e-6)?;
        }
        Ok(s * h)
    }
}

pub fn split_kernel(eps: f64) -> Result<SplitKernel> {
    check_epsilon(eps)?;
    Ok(SplitKernel { eps })
}

/// `∫∫ G(s, x − x' − s v', v − v') f(x', v') dx' dv'`: the value at `(x, v)`
/// after time `s` of the constant-coefficient evolution started from `f`.
pub fn propagate(s: f64, f: impl Fn(f64, f64) -> f64, x: f64, v: f64, q: &KernelQuadrature) -> f64 {
    let su = (s.powi(3) / 6.0).sqrt();
    let sw = (2.0 * s).sqrt();
    let k = q.sigmas;
    midpoint(-k * sw, k * sw, q.nodes, |w| {
        midpoint(-k * su, k * su, q.nodes, |u| {
            let vp = v - w;
            let xp = x - u - 0.5 * s * w - s * vp;
            g1(s, u + 0.5 * s * w, w) * f(xp, vp)
        })
    })
}

/// Group convolution of a space-time source sampled on a grid, evaluated at
/// the given points. The source is zero outside its grid box.
pub fn convolve_representation(source: &GridFunction, eval: &[PhasePoint], q: &KernelQuadrature) -> Vec<f64> {
    eval.par_iter().map(|z| convolve_at(source, z, q)).collect()
}

fn convolve_at(src: &GridFunction, z: &PhasePoint, q: &KernelQuadrature) -> f64 {
    let at = src.axes[0];
    let span = z.t - at.lo;
    if span <= 0.0 {
        return 0.0;
    }
    let (x, v) = (z.x[0], z.v[0]);
    // Dyadic panels in s = t − t' refined towards s = 0, each at most one
    // source time step wide.
    let s_top = span;
    let s_floor = (q.min_panel * span).max(f64::MIN_POSITIVE);
    let s_skip = (z.t - at.hi).max(0.0);
    let mut total = 0.0;
    let mut hi = s_top;
    while hi > s_floor && hi > s_skip {
        let lo = (hi / 2.0).max(s_skip);
        let pieces = ((hi - lo) / at.step()).ceil().max(1.0) as usize;
        let m = pieces * q.time_nodes;
        let h = (hi - lo) / m as f64;
        for i in 0..m {
            let s = lo + (i as f64 + 0.5) * h;
            total += h * spatial_convolution(src, z.t - s, s, x, v, q);
        }
        hi = lo;
    }
    if s_skip == 0.0 {
        // Below the finest panel the kernel acts as a Dirac mass.
        total += hi * src.sample_or_zero(z.t, x, v);
    }
    total
}

fn spatial_convolution(src: &GridFunction, tp: f64, s: f64, x: f64, v: f64, q: &KernelQuadrature) -> f64 {
    let [_, ax, av] = src.axes;
    let k = q.sigmas;
    let sw = (2.0 * s).sqrt();
    let su = (s.powi(3) / 6.0).sqrt();
    // w = v − v' restricted to the source's v-range.
    let w_lo = (-k * sw).max(v - av.hi);
    let w_hi = (k * sw).min(v - av.lo);
    if w_lo >= w_hi {
        return 0.0;
    }
    let hw = sw.min(av.step()) / q.density;
    let nw = ((w_hi - w_lo) / hw).ceil().max(1.0) as usize;
    let hu = su.min(ax.step()) / q.density;
    let mut acc = 0.0;
    let dw = (w_hi - w_lo) / nw as f64;
    for i in 0..nw {
        let w = w_lo + (i as f64 + 0.5) * dw;
        let vp = v - w;
        // x' = x − u − s v + s w / 2 restricted to the source's x-range.
        let base = x - s * v + 0.5 * s * w;
        let u_lo = (-k * su).max(base - ax.hi);
        let u_hi = (k * su).min(base - ax.lo);
        if u_lo >= u_hi {
            continue;
        }
        let nu = ((u_hi - u_lo) / hu).ceil().max(1.0) as usize;
        let du = (u_hi - u_lo) / nu as f64;
        let mut inner = 0.0;
        for j in 0..nu {
            let u = u_lo + (j as f64 + 0.5) * du;
            let g = g1(s, u + 0.5 * s * w, w);
            if g > 0.0 {
                inner += g * src.sample_or_zero(tp, base - u, vp);
            }
        }
        acc += inner * du;
    }
    acc * dw
}

/// Representation of `∇_v·F1 + F2` through the group convolution, with the
/// divergence taken by centered differences on the source grid.
pub fn represent_divergence_form(f1: &GridFunction, f2: &GridFunction, eval: &GridFunction, q: &KernelQuadrature) -> Result<GridFunction> {
    if f1.axes != f2.axes {
        return Err(invalid("F1 and F2 must share a grid"));
    }
    let div = f1.dv_nodes();
    let mut src = f2.clone();
    for (s, d) in src.data.iter_mut().zip(&div) {
        *s += d;
    }
    let pts = eval.node_points();
    let values = convolve_representation(&src, &pts, q);
    let mut out = eval.clone();
    out.data = values;
    Ok(out)
}

/// `‖f‖_{L^p} ≤ C (2 + 1/d − p)^{-1} (‖F1‖_{L²} + ‖F2‖_{L²})` for the
/// convolution `f` of `∇_v·F1 + F2`, with `d = 1`.
pub fn check_kolm_lp_bound(f1: &GridFunction, f2: &GridFunction, p: f64, f: &GridFunction, bound: Option<f64>) -> Result<EstimateReport> {
    let d = 1.0;
    if !(p >= 2.0 && p < 2.0 + 1.0 / d) {
        return Err(invalid(format!("p must lie in [2, 2 + 1/d), got {p}")));
    }
    let lhs = grid_lp_norm(f, p);
    let blow = 1.0 / (2.0 + 1.0 / d - p);
    let n1 = grid_lp_norm(f1, 2.0);
    let n2 = grid_lp_norm(f2, 2.0);
    let rhs_terms = vec![RhsTerm::new("blowup_times_norm_F1", blow * n1), RhsTerm::new("blowup_times_norm_F2", blow * n2)];
    let mut r = EstimateReport::new("kolmogorov_lp", lhs, rhs_terms, bound);
    r.diagnostics.insert("p".into(), p);
    Ok(r)
}

/// CSV table with columns `t, x, v, G, dGdx, dGdv`.
pub fn export_kernel_csv<W: Write>(out: W, ts: &[f64], xs: &[f64], vs: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "v", "G", "dGdx", "dGdv"])?;
    for &t in ts {
        for &x in xs {
            for &v in vs {
                let g = g1(t, x, v);
                let (gx, gv) = if t > 0.0 { kernel_gradients(t, &[x], &[v])? } else { ([0.0], [0.0]) };
                w.write_record([t, x, v, g, gx[0], gv[0]].map(|c| c.to_string()))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_unit_time() {
        assert!((g1(1.0, 0.0, 0.0) - (3.0 / (4.0 * PI * PI)).sqrt()).abs() < 1e-15);
        assert_eq!(g1(-1.0, 0.0, 0.0), 0.0);
        assert_eq!(g1(0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn deep_tail_underflows_to_zero() {
        assert_eq!(g1(1e-3, 1.0, 0.0), 0.0);
    }

    #[test]
    fn cutoff_plateaus() {
        assert_eq!(cutoff(0.3), 1.0);
        assert_eq!(cutoff(1.0), 1.0);
        assert_eq!(cutoff(2.0), 0.0);
        let mut prev = 1.0;
        for i in 0..=100 {
            let c = cutoff(1.0 + i as f64 / 100.0);
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn epsilon_range() {
        assert!(split_kernel(0.0).is_err());
        assert!(split_kernel(1.0).is_err());
        assert!(KernelParams::new(1, Some(1.5)).is_err());
        assert!(KernelParams::new(1, Some(0.5)).is_ok());
    }
}
