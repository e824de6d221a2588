//! Cell-centred tensor grids over `(t, x, v)` and their file formats.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{KineticCylinder, PhasePoint};

const MAGIC: &[u8; 8] = b"HYPOKGF\0";
const VERSION: u32 = 1;

/// `n` cells of equal width on `[lo, hi]`; nodes sit at cell centres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) || n == 0 {
            return Err(invalid(format!("bad axis [{lo}, {hi}] with {n} cells")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.step()
    }

    /// Indices of nodes with `a < node ≤ b` (time convention).
    pub fn nodes_in_half_open(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let h = self.step();
        let first = (((a - self.lo) / h - 0.5).floor() + 1.0).max(0.0) as usize;
        let mut first = first.min(self.n);
        while first > 0 && self.node(first - 1) > a {
            first -= 1;
        }
        while first < self.n && self.node(first) <= a {
            first += 1;
        }
        let mut last = first;
        while last < self.n && self.node(last) <= b {
            last += 1;
        }
        first..last
    }

    /// Indices of nodes with `|node − c| < r`.
    pub fn nodes_in_open(&self, c: f64, r: f64) -> std::ops::Range<usize> {
        let h = self.step();
        let guess = (((c - r - self.lo) / h - 0.5).ceil()).max(0.0) as usize;
        let mut first = guess.min(self.n);
        while first > 0 && (self.node(first - 1) - c).abs() < r {
            first -= 1;
        }
        while first < self.n && self.node(first) <= c - r {
            first += 1;
        }
        let mut last = first;
        while last < self.n && (self.node(last) - c).abs() < r {
            last += 1;
        }
        first..last
    }

    /// Lower node index and weight for linear interpolation, clamped to the
    /// node range.
    fn locate(&self, y: f64) -> (usize, f64) {
        if self.n == 1 {
            return (0, 0.0);
        }
        let s = ((y - self.lo) / self.step() - 0.5).clamp(0.0, (self.n - 1) as f64);
        let i = (s.floor() as usize).min(self.n - 2);
        (i, s - i as f64)
    }

    fn contains(&self, y: f64) -> bool {
        y >= self.lo && y <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Nearest,
    #[default]
    Multilinear,
}

/// Values of a function on a cell-centred `(t, x, v)` grid, stored row-major
/// with `v` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub axes: [Axis; 3],
    pub data: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
    /// Margin in `t`, `x`, `v` that measurement cylinders must keep from the box edges.
    pub padding: [f64; 3],
    pub interpolation: Interpolation,
}

impl GridFunction {
    pub fn zeros(axes: [Axis; 3]) -> Self {
        let len = axes.iter().map(|a| a.n).product();
        Self { axes, data: vec![0.0; len], metadata: BTreeMap::new(), padding: [0.0; 3], interpolation: Interpolation::default() }
    }

    pub fn from_fn(axes: [Axis; 3], f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Self {
        let mut g = Self::zeros(axes);
        let [at, ax, av] = axes;
        g.data.par_chunks_mut(av.n).enumerate().for_each(|(row, out)| {
            let (t, x) = (at.node(row / ax.n), ax.node(row % ax.n));
            for (j, o) in out.iter_mut().enumerate() {
                *o = f(t, x, av.node(j));
            }
        });
        g
    }

    pub fn with_padding(mut self, padding: [f64; 3]) -> Self {
        self.padding = padding;
        self
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.axes[0].n, self.axes[1].n, self.axes[2].n]
    }

    pub fn steps(&self) -> [f64; 3] {
        [self.axes[0].step(), self.axes[1].step(), self.axes[2].step()]
    }

    pub fn cell_volume(&self) -> f64 {
        self.steps().iter().product()
    }

    #[inline]
    pub fn index(&self, it: usize, ix: usize, iv: usize) -> usize {
        (it * self.axes[1].n + ix) * self.axes[2].n + iv
    }

    #[inline]
    pub fn at(&self, it: usize, ix: usize, iv: usize) -> f64 {
        self.data[self.index(it, ix, iv)]
    }

    pub fn node(&self, it: usize, ix: usize, iv: usize) -> PhasePoint {
        PhasePoint::new(self.axes[0].node(it), [self.axes[1].node(ix)], [self.axes[2].node(iv)])
    }

    pub fn node_points(&self) -> Vec<PhasePoint> {
        let [nt, nx, nv] = self.shape();
        (0..nt * nx * nv).map(|k| self.node(k / (nx * nv), (k / nv) % nx, k % nv)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `∂_v` at node `(it, ix, iv)`: centred inside, one-sided at the ends.
    pub fn dv_node(&self, it: usize, ix: usize, iv: usize) -> f64 {
        let nv = self.axes[2].n;
        if nv < 2 {
            return 0.0;
        }
        let h = self.axes[2].step();
        let (a, b) = (iv.saturating_sub(1), (iv + 1).min(nv - 1));
        (self.at(it, ix, b) - self.at(it, ix, a)) / ((b - a) as f64 * h)
    }

    pub fn dv_nodes(&self) -> Vec<f64> {
        let [_, nx, nv] = self.shape();
        (0..self.data.len()).map(|k| self.dv_node(k / (nx * nv), (k / nv) % nx, k % nv)).collect()
    }

    fn blend(&self, t: f64, x: f64, v: f64, g: impl Fn(usize, usize, usize) -> f64) -> f64 {
        let [at, ax, av] = self.axes;
        let (i, a) = at.locate(t);
        let (j, b) = ax.locate(x);
        let (k, c) = av.locate(v);
        if self.interpolation == Interpolation::Nearest {
            let pick = |i: usize, w: f64, n: usize| if w >= 0.5 && i + 1 < n { i + 1 } else { i };
            return g(pick(i, a, at.n), pick(j, b, ax.n), pick(k, c, av.n));
        }
        let mut s = 0.0;
        for (di, wi) in [(0, 1.0 - a), (1, a)] {
            if wi == 0.0 || i + di >= at.n {
                continue;
            }
            for (dj, wj) in [(0, 1.0 - b), (1, b)] {
                if wj == 0.0 || j + dj >= ax.n {
                    continue;
                }
                for (dk, wk) in [(0, 1.0 - c), (1, c)] {
                    if wk == 0.0 || k + dk >= av.n {
                        continue;
                    }
                    s += wi * wj * wk * g(i + di, j + dj, k + dk);
                }
            }
        }
        s
    }

    /// Interpolated value, clamped to the node range.
    pub fn interpolate(&self, t: f64, x: f64, v: f64) -> f64 {
        self.blend(t, x, v, |i, j, k| self.at(i, j, k))
    }

    /// Interpolated `∂_v`.
    pub fn interpolate_dv(&self, t: f64, x: f64, v: f64) -> f64 {
        self.blend(t, x, v, |i, j, k| self.dv_node(i, j, k))
    }

    /// Interpolated value inside the box, zero outside.
    pub fn sample_or_zero(&self, t: f64, x: f64, v: f64) -> f64 {
        let [at, ax, av] = self.axes;
        if at.contains(t) && ax.contains(x) && av.contains(v) {
            self.interpolate(t, x, v)
        } else {
            0.0
        }
    }

    /// The box shrunk by the padding.
    pub fn safe_box(&self) -> [(f64, f64); 3] {
        let mut b = [(0.0, 0.0); 3];
        for (k, a) in self.axes.iter().enumerate() {
            b[k] = (a.lo + self.padding[k], a.hi - self.padding[k]);
        }
        b
    }

    /// Errors unless the whole cylinder lies inside the safe box.
    pub fn check_inside(&self, c: &KineticCylinder) -> Result<()> {
        let [(t0, t1), (x0, x1), (v0, v1)] = self.safe_box();
        let (lo, hi) = c.time_window();
        let tol = 1e-12 * (1.0 + self.axes.iter().map(|a| a.hi.abs().max(a.lo.abs())).fold(0.0, f64::max));
        let xs = [c.x_center(lo)[0], c.x_center(hi)[0]];
        let ok = lo >= t0 - tol
            && hi <= t1 + tol
            && xs.iter().all(|&m| m - c.rx >= x0 - tol && m + c.rx <= x1 + tol)
            && c.anchor.v[0] - c.rv >= v0 - tol
            && c.anchor.v[0] + c.rv <= v1 + tol;
        if ok {
            Ok(())
        } else {
            Err(Error::OutsideSafeRegion(format!("{:?} of radius {} at {:?}", c.kind, c.radius, c.center)))
        }
    }

    /// Restriction to the node ranges, keeping the cell geometry.
    pub fn subgrid(&self, r: [std::ops::Range<usize>; 3]) -> Result<Self> {
        let mut axes = self.axes;
        for (k, a) in axes.iter_mut().enumerate() {
            if r[k].is_empty() || r[k].end > a.n {
                return Err(invalid("empty or out-of-range subgrid"));
            }
            let h = a.step();
            *a = Axis { lo: a.lo + r[k].start as f64 * h, hi: a.lo + r[k].end as f64 * h, n: r[k].len() };
        }
        let mut out = Self::zeros(axes);
        out.metadata = self.metadata.clone();
        out.interpolation = self.interpolation;
        let mut p = 0;
        for it in r[0].clone() {
            for ix in r[1].clone() {
                let s = self.index(it, ix, r[2].start);
                out.data[p..p + r[2].len()].copy_from_slice(&self.data[s..s + r[2].len()]);
                p += r[2].len();
            }
        }
        Ok(out)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u32::<LittleEndian>(1)?;
        for a in &self.axes {
            w.write_f64::<LittleEndian>(a.lo)?;
            w.write_f64::<LittleEndian>(a.hi)?;
            w.write_f64::<LittleEndian>(a.step())?;
            w.write_u64::<LittleEndian>(a.n as u64)?;
        }
        for p in &self.padding {
            w.write_f64::<LittleEndian>(*p)?;
        }
        let mut meta = self.metadata.clone();
        meta.insert("interpolation".into(), format!("{:?}", self.interpolation).to_lowercase());
        w.write_u32::<LittleEndian>(meta.len() as u32)?;
        for (k, v) in &meta {
            for s in [k, v] {
                w.write_u32::<LittleEndian>(s.len() as u32)?;
                w.write_all(s.as_bytes())?;
            }
        }
        for v in &self.data {
            w.write_f64::<LittleEndian>(*v)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let d = r.read_u32::<LittleEndian>()?;
        if d != 1 {
            return Err(Error::Format(format!("unsupported dimension {d}")));
        }
        let mut axes = [Axis { lo: 0.0, hi: 1.0, n: 1 }; 3];
        for a in axes.iter_mut() {
            let lo = r.read_f64::<LittleEndian>()?;
            let hi = r.read_f64::<LittleEndian>()?;
            let _spacing = r.read_f64::<LittleEndian>()?;
            let n = r.read_u64::<LittleEndian>()? as usize;
            *a = Axis::new(lo, hi, n).map_err(|e| Error::Format(e.to_string()))?;
        }
        let mut padding = [0.0; 3];
        for p in padding.iter_mut() {
            *p = r.read_f64::<LittleEndian>()?;
        }
        let count = r.read_u32::<LittleEndian>()?;
        let mut metadata = BTreeMap::new();
        for _ in 0..count {
            let mut kv = [String::new(), String::new()];
            for s in kv.iter_mut() {
                let len = r.read_u32::<LittleEndian>()? as usize;
                let mut buf = vec![0u8; len];
                r.read_exact(&mut buf)?;
                *s = String::from_utf8(buf).map_err(|_| Error::Format("metadata is not UTF-8".into()))?;
            }
            let [k, v] = kv;
            metadata.insert(k, v);
        }
        let interpolation = match metadata.remove("interpolation").as_deref() {
            Some("nearest") => Interpolation::Nearest,
            _ => Interpolation::Multilinear,
        };
        let len: usize = axes.iter().map(|a| a.n).product();
        let mut data = vec![0.0; len];
        r.read_f64_into::<LittleEndian>(&mut data)?;
        Ok(Self { axes, data, metadata, padding, interpolation })
    }

    /// One row `t, x, v, value` per node; floats use the shortest
    /// representation that parses back to the same bits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "x", "v", "value"])?;
        let [nt, nx, nv] = self.shape();
        for it in 0..nt {
            for ix in 0..nx {
                for iv in 0..nv {
                    let z = self.node(it, ix, iv);
                    out.write_record([z.t, z.x[0], z.v[0], self.at(it, ix, iv)].map(|c| c.to_string()))?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}
