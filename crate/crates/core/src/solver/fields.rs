//! Explicit solutions and sub-solutions.

use super::grid::{Axis, GridFunction};
use crate::error::{invalid, Result};
use crate::estimates::field::PhaseField;
use crate::geometry::PhasePoint;
use crate::kernel::{g1, kernel_gradients};

/// `z ↦ G(z0⁻¹ ∘ z)`: a positive solution of the constant-coefficient
/// equation with `A = 1`, `B = 0`, `S = 0` for `t > t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSolution {
    pub source: PhasePoint,
    pub amplitude: f64,
}

impl KernelSolution {
    pub fn new(source: PhasePoint) -> Self {
        Self { source, amplitude: 1.0 }
    }

    /// The solution seen through `z ↦ origin ∘ (R z)`: `z̃ ↦ f(origin ∘ (R z̃))`
    /// is again a kernel solution, up to the factor `R^{-4}` for `d = 1`.
    pub fn pulled_back(&self, origin: &PhasePoint, scale: f64) -> Self {
        let src = origin.inverse().compose(&self.source).scale(1.0 / scale);
        Self { source: src, amplitude: self.amplitude * scale.powi(-4) }
    }
}

impl PhaseField for KernelSolution {
    fn value(&self, z: &PhasePoint) -> f64 {
        let u = self.source.inverse().compose(z);
        self.amplitude * g1(u.t, u.x[0], u.v[0])
    }

    fn dv(&self, z: &PhasePoint) -> f64 {
        let u = self.source.inverse().compose(z);
        if u.t <= 0.0 {
            return 0.0;
        }
        // u depends on v through u.v = v − v0 only.
        let (_, gv) = kernel_gradients(u.t, &u.x, &u.v).expect("positive time checked above");
        self.amplitude * gv[0]
    }
}

/// `sign · 1_{x + c t < a}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorField {
    pub c: f64,
    pub a: f64,
    pub sign: f64,
}

impl PhaseField for IndicatorField {
    fn value(&self, z: &PhasePoint) -> f64 {
        if z.x[0] + self.c * z.t < self.a {
            self.sign
        } else {
            0.0
        }
    }

    fn dv(&self, _: &PhasePoint) -> f64 {
        0.0
    }
}

/// Sampling of `1_{x + c t < a}` on a grid. Only `c` above every velocity of
/// the box gives a sub-solution; smaller `c` is rejected.
pub fn indicator_subsolution(c: f64, a: f64, axes: [Axis; 3]) -> Result<GridFunction> {
    let v_sup = axes[2].lo.abs().max(axes[2].hi.abs());
    if !(c > v_sup) {
        return Err(invalid(format!("1_(x+ct<a) is a sub-solution only for c > sup|v| = {v_sup}, got c = {c}")));
    }
    let f = IndicatorField { c, a, sign: 1.0 };
    let mut g = GridFunction::from_fn(axes, |t, x, v| f.value(&PhasePoint::new(t, [x], [v])));
    g.metadata.insert("source".into(), format!("indicator c={c} a={a}"));
    Ok(g)
}

/// Sampling of `G(z0⁻¹ ∘ z)` on a grid starting strictly after `t0`.
pub fn translated_kernel_solution(z0: PhasePoint, axes: [Axis; 3]) -> Result<GridFunction> {
    if !(z0.t < axes[0].lo) {
        return Err(invalid("the kernel source must lie strictly before the grid's time range"));
    }
    let k = KernelSolution::new(z0);
    let mut g = GridFunction::from_fn(axes, |t, x, v| k.value(&PhasePoint::new(t, [x], [v])));
    g.metadata.insert("source".into(), format!("kernel z0=({}, {}, {})", z0.t, z0.x[0], z0.v[0]));
    Ok(g)
}
