//! Fields on phase space, reference frames and cylinder sampling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{KineticCylinder, PhasePoint};
use crate::solver::coefficients::CoefficientField;
use crate::solver::grid::GridFunction;

/// Anything that can be evaluated with its velocity derivative.
pub trait PhaseField: Sync {
    fn value(&self, z: &PhasePoint) -> f64;
    fn dv(&self, z: &PhasePoint) -> f64;
    fn grid(&self) -> Option<&GridFunction> {
        None
    }
}

impl PhaseField for GridFunction {
    fn value(&self, z: &PhasePoint) -> f64 {
        self.interpolate(z.t, z.x[0], z.v[0])
    }
    fn dv(&self, z: &PhasePoint) -> f64 {
        self.interpolate_dv(z.t, z.x[0], z.v[0])
    }
    fn grid(&self) -> Option<&GridFunction> {
        Some(self)
    }
}

/// A constant function.
#[derive(Debug, Clone, Copy)]
pub struct ConstantField(pub f64);

impl PhaseField for ConstantField {
    fn value(&self, _: &PhasePoint) -> f64 {
        self.0
    }
    fn dv(&self, _: &PhasePoint) -> f64 {
        0.0
    }
}

/// A field given by closures for the value and `∂_v`.
pub struct FnField<F, G> {
    pub f: F,
    pub dv: G,
}

impl<F, G> PhaseField for FnField<F, G>
where
    F: Fn(&PhasePoint) -> f64 + Sync,
    G: Fn(&PhasePoint) -> f64 + Sync,
{
    fn value(&self, z: &PhasePoint) -> f64 {
        (self.f)(z)
    }
    fn dv(&self, z: &PhasePoint) -> f64 {
        (self.dv)(z)
    }
}

/// The map `z̃ ↦ origin ∘ (R z̃)` from statement coordinates to the
/// physical grid. A statement about `Q_1` is checked on `origin ∘ (R Q_1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: PhasePoint,
    pub scale: f64,
}

impl Default for Frame {
    fn default() -> Self {
        Self { origin: PhasePoint::origin(), scale: 1.0 }
    }
}

impl Frame {
    pub fn new(origin: PhasePoint, scale: f64) -> Self {
        Self { origin, scale }
    }

    pub fn to_physical(&self, z: &PhasePoint) -> PhasePoint {
        self.origin.compose(&z.scale(self.scale))
    }

    pub fn to_unit(&self, z: &PhasePoint) -> PhasePoint {
        self.origin.inverse().compose(z).scale(1.0 / self.scale)
    }

    pub fn cylinder(&self, c: &KineticCylinder) -> KineticCylinder {
        c.transformed(&self.origin, self.scale)
    }

    /// Physical measure per unit measure, `R^{4d+2}` with `d = 1`.
    pub fn jacobian(&self) -> f64 {
        self.scale.powi(6)
    }

    /// Frame `self ∘ other`: first `other`, then `self`.
    pub fn then(&self, inner: &Frame) -> Frame {
        Frame { origin: self.to_physical(&inner.origin), scale: self.scale * inner.scale }
    }
}

/// How integrals over a cylinder are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// Grid nodes whose centres lie in the cylinder, one cell volume each.
    CellCenters,
    /// Midpoint lattice in the cylinder's own `(s, y, w)` coordinates.
    Lattice([usize; 3]),
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::Lattice([16, 16, 16])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// Point in statement coordinates.
    pub z: PhasePoint,
    pub f: f64,
    pub dv: f64,
    pub s: f64,
}

/// Samples sharing `(t, v)` ordered along `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct XLine {
    pub samples: Vec<Sample>,
    /// Spacing along `x` in statement coordinates.
    pub dx: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSamples {
    pub lines: Vec<XLine>,
    /// Measure carried by each sample, in statement coordinates.
    pub weight: f64,
    /// Exact measure of the cylinder in statement coordinates.
    pub volume: f64,
}

impl CylinderSamples {
    pub fn iter(&self) -> impl Iterator<Item = &Sample> {
        self.lines.iter().flat_map(|l| l.samples.iter())
    }

    pub fn len(&self) -> usize {
        self.lines.iter().map(|l| l.samples.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Σ w·g(sample)`.
    pub fn integrate(&self, g: impl Fn(&Sample) -> f64) -> f64 {
        self.iter().map(g).sum::<f64>() * self.weight
    }

    pub fn measure(&self) -> f64 {
        self.len() as f64 * self.weight
    }
}

/// What to evaluate on a cylinder.
#[derive(Clone, Copy)]
pub struct Setting<'a> {
    pub f: &'a dyn PhaseField,
    pub coef: Option<&'a CoefficientField>,
    pub frame: Frame,
    pub quadrature: Quadrature,
}

impl<'a> Setting<'a> {
    /// Cell centres for grid functions, the default lattice otherwise.
    pub fn new(f: &'a dyn PhaseField) -> Self {
        let quadrature = if f.grid().is_some() { Quadrature::CellCenters } else { Quadrature::default() };
        Self { f, coef: None, frame: Frame::default(), quadrature }
    }

    pub fn with_coefficients(mut self, c: &'a CoefficientField) -> Self {
        self.coef = Some(c);
        self
    }

    pub fn in_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn with_quadrature(mut self, q: Quadrature) -> Self {
        self.quadrature = q;
        self
    }

    /// Source term in statement coordinates at physical points.
    fn sources(&self, zs: &[PhasePoint]) -> Vec<f64> {
        let r2 = self.frame.scale * self.frame.scale;
        match self.coef {
            None => vec![0.0; zs.len()],
            Some(c) => c.source_many(zs).iter().map(|s| s * r2).collect(),
        }
    }

    /// `‖S‖_∞` in statement coordinates.
    pub fn source_sup(&self) -> f64 {
        self.coef.map_or(0.0, |c| c.s_sup() * self.frame.scale * self.frame.scale)
    }

    /// Sample `cyl`, given in statement coordinates.
    pub fn sample(&self, cyl: &KineticCylinder) -> Result<CylinderSamples> {
        let phys = self.frame.cylinder(cyl);
        if let Some(g) = self.f.grid() {
            g.check_inside(&phys)?;
        }
        let r = self.frame.scale;
        let out = match self.quadrature {
            Quadrature::CellCenters => {
                let g = self.f.grid().ok_or_else(|| crate::error::invalid("cell-centre quadrature needs a grid function"))?;
                let [at, ax, av] = g.axes;
                let (lo, hi) = phys.time_window();
                let ts = at.nodes_in_half_open(lo, hi);
                let vs = av.nodes_in_open(phys.anchor.v[0], phys.rv);
                let lines: Vec<XLine> = ts
                    .flat_map(|it| vs.clone().map(move |iv| (it, iv)))
                    .collect::<Vec<_>>()
                    .into_par_iter()
                    .filter_map(|(it, iv)| {
                        let t = at.node(it);
                        let xs = ax.nodes_in_open(phys.x_center(t)[0], phys.rx);
                        if xs.is_empty() {
                            return None;
                        }
                        let zps: Vec<PhasePoint> = xs.clone().map(|ix| g.node(it, ix, iv)).collect();
                        let s = self.sources(&zps);
                        let samples = xs
                            .zip(zps.iter().zip(s))
                            .map(|(ix, (zp, s))| Sample { z: self.frame.to_unit(zp), f: g.at(it, ix, iv), dv: g.dv_node(it, ix, iv) * r, s })
                            .collect();
                        Some(XLine { samples, dx: ax.step() / r.powi(3) })
                    })
                    .collect();
                CylinderSamples { lines, weight: g.cell_volume() / self.frame.jacobian(), volume: cyl.volume() }
            }
            Quadrature::Lattice([nt, nx, nv]) => {
                let (ht, hx, hv) = ((cyl.t_hi - cyl.t_lo) / nt as f64, 2.0 * cyl.rx / nx as f64, 2.0 * cyl.rv / nv as f64);
                let lines = (0..nt * nv)
                    .into_par_iter()
                    .map(|k| {
                        let s = cyl.t_lo + ((k / nv) as f64 + 0.5) * ht;
                        let w = -cyl.rv + ((k % nv) as f64 + 0.5) * hv;
                        let zs: Vec<PhasePoint> = (0..nx).map(|i| cyl.from_local(s, [-cyl.rx + (i as f64 + 0.5) * hx], [w])).collect();
                        let zps: Vec<PhasePoint> = zs.iter().map(|z| self.frame.to_physical(z)).collect();
                        let src = self.sources(&zps);
                        let samples = zs.iter().zip(&zps).zip(src).map(|((z, zp), s)| Sample { z: *z, f: self.f.value(zp), dv: self.f.dv(zp) * r, s }).collect();
                        XLine { samples, dx: hx }
                    })
                    .collect();
                CylinderSamples { lines, weight: cyl.volume() / (nt * nx * nv) as f64, volume: cyl.volume() }
            }
        };
        if out.is_empty() {
            return Err(Error::InvalidInput(format!("no quadrature nodes inside {:?} of radius {}", cyl.kind, cyl.radius)));
        }
        Ok(out)
    }
}
