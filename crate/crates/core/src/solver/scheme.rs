//! Strang splitting for `∂_t f + v ∂_x f = ∂_v(A ∂_v f) + B ∂_v f + S` in one
//! space dimension.
//!
//! Transport is a semi-Lagrangian shift with four-point cubic interpolation,
//! periodic in `x` and mass-conserving row by row; the velocity part is backward Euler
//! with harmonic face averages of `A`, upwinded `B` and zero flux at
//! `|v| = v_max`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coefficients::{CoefficientField, CoefficientModel, Coefficients};
use super::grid::{Axis, GridFunction};
use crate::error::{invalid, Error, Result};
use crate::geometry::PhasePoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveGrid {
    /// Time cells; the march starts at `t.lo` and stops at `t.hi`.
    pub t: Axis,
    pub x: Axis,
    pub v: Axis,
    /// Margins kept free of measurement cylinders.
    pub padding: [f64; 3],
    /// Only nodes inside this box are stored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<[(f64, f64); 3]>,
}

impl SolveGrid {
    pub fn new(t: Axis, x: Axis, v: Axis) -> Self {
        Self { t, x, v, padding: [0.0, 1.0, 2.0], record: None }
    }

    pub fn v_max(&self) -> f64 {
        self.v.lo.abs().max(self.v.hi.abs())
    }

    /// Largest stable time step of the transport stage.
    pub fn cfl_limit(&self) -> f64 {
        self.x.step() / self.v_max()
    }

    pub fn check(&self) -> Result<()> {
        let dt = self.t.step();
        let limit = self.cfl_limit();
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, limit });
        }
        Ok(())
    }

    /// The same box with every axis refined by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let mut g = *self;
        g.t.n *= factor;
        g.x.n *= factor;
        g.v.n *= factor;
        g
    }
}

fn cubic_weights(th: f64) -> [f64; 4] {
    [
        -th * (th - 1.0) * (th - 2.0) / 6.0,
        (th + 1.0) * (th - 1.0) * (th - 2.0) / 2.0,
        -(th + 1.0) * th * (th - 2.0) / 2.0,
        (th + 1.0) * th * (th - 1.0) / 6.0,
    ]
}

/// Advance `∂_t f + v ∂_x f = 0` by `tau` on an `nx × nv` slab.
pub(crate) fn transport(state: &[f64], out: &mut [f64], x: &Axis, v: &Axis, tau: f64) {
    let (nx, nv) = (x.n, v.n);
    let stencils: Vec<(i64, [f64; 4])> = (0..nv)
        .map(|j| {
            let u = v.node(j) * tau / x.step();
            let m = (-u).floor();
            (m as i64, cubic_weights(-u - m))
        })
        .collect();
    out.par_chunks_mut(nv).enumerate().for_each(|(i, row)| {
        for (j, o) in row.iter_mut().enumerate() {
            let (m, w) = stencils[j];
            let mut s = 0.0;
            for (q, wq) in w.iter().enumerate() {
                let src = (i as i64 + m + q as i64 - 1).rem_euclid(nx as i64) as usize;
                s += wq * state[src * nv + j];
            }
            *o = s;
        }
    });
}

fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Backward Euler for `∂_t f = ∂_v(A ∂_v f) + B ∂_v f + S` on every x-row.
pub(crate) fn diffusion(state: &mut [f64], table: &[Coefficients], v: &Axis, dt: f64) {
    let nv = v.n;
    let h = v.step();
    state.par_chunks_mut(nv).zip(table.par_chunks(nv)).for_each(|(row, coef)| {
        let mut lower = vec![0.0; nv];
        let mut diag = vec![1.0; nv];
        let mut upper = vec![0.0; nv];
        for j in 0..nv {
            if j + 1 < nv {
                let k = dt * harmonic(coef[j].a, coef[j + 1].a) / (h * h);
                diag[j] += k;
                upper[j] -= k;
                diag[j + 1] += k;
                lower[j + 1] -= k;
            }
            let b = coef[j].b * dt / h;
            if b > 0.0 && j + 1 < nv {
                diag[j] += b;
                upper[j] -= b;
            } else if b < 0.0 && j > 0 {
                diag[j] -= b;
                lower[j] += b;
            }
            row[j] += dt * coef[j].s;
        }
        thomas(&lower, &mut diag, &upper, row);
    });
}

/// Tridiagonal solve in place; `diag` is overwritten.
fn thomas(lower: &[f64], diag: &mut [f64], upper: &[f64], rhs: &mut [f64]) {
    let n = rhs.len();
    for j in 1..n {
        let w = lower[j] / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for j in (0..n - 1).rev() {
        rhs[j] = (rhs[j] - upper[j] * rhs[j + 1]) / diag[j];
    }
}

fn coefficient_table(coef: &CoefficientField, t: f64, x: &Axis, v: &Axis) -> Vec<Coefficients> {
    let (nx, nv) = (x.n, v.n);
    let rows: Vec<Vec<Coefficients>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let zs: Vec<PhasePoint> = (0..nv).map(|j| PhasePoint::new(t, [x.node(i)], [v.node(j)])).collect();
            coef.at_many(&zs)
        })
        .collect();
    rows.concat()
}

fn record_ranges(grid: &SolveGrid) -> [std::ops::Range<usize>; 3] {
    let axes = [grid.t, grid.x, grid.v];
    let mut r = [0..grid.t.n, 0..grid.x.n, 0..grid.v.n];
    if let Some(b) = grid.record {
        for k in 0..3 {
            let a = axes[k];
            let lo = (0..a.n).find(|&i| a.node(i) >= b[k].0).unwrap_or(a.n);
            let hi = (0..a.n).rev().find(|&i| a.node(i) <= b[k].1).map_or(0, |i| i + 1);
            r[k] = lo..hi.max(lo);
        }
    }
    r
}

/// March `f0` from `grid.t.lo` to `grid.t.hi`.
///
/// The stored value at a time node is the average of the two bounding time
/// levels. Every row of the result is a full Strang step.
pub fn solve(f0: &(dyn Fn(f64, f64) -> f64 + Sync), coef: &CoefficientField, grid: &SolveGrid) -> Result<GridFunction> {
    grid.check()?;
    let ranges = record_ranges(grid);
    if ranges.iter().any(|r| r.is_empty()) {
        return Err(invalid("record box contains no grid nodes"));
    }
    let (x, v) = (grid.x, grid.v);
    let (nx, nv) = (x.n, v.n);
    let dt = grid.t.step();

    let mut state: Vec<f64> = (0..nx * nv).into_par_iter().map(|k| f0(x.node(k / nv), v.node(k % nv))).collect();
    if state.iter().any(|s| !s.is_finite()) {
        return Err(invalid("initial data must be finite"));
    }
    let mut scratch = vec![0.0; nx * nv];
    let mut prev = vec![0.0; nx * nv];

    let full = GridFunction::zeros([grid.t, x, v]);
    let mut out = full.subgrid(ranges.clone())?;
    let slab = ranges[1].len() * ranges[2].len();

    let mut cache: Option<(i64, Vec<Coefficients>)> = None;
    let reuse = coef.placement.is_none();

    for n in 0..grid.t.n {
        let t_mid = grid.t.lo + (n as f64 + 0.5) * dt;
        prev.copy_from_slice(&state);

        transport(&state, &mut scratch, &x, &v, 0.5 * dt);
        let key = match coef.model {
            CoefficientModel::Constant { .. } => 0,
            CoefficientModel::Rough { cell, .. } => (t_mid / cell[0]).floor() as i64,
        };
        let fresh = !(reuse && cache.as_ref().is_some_and(|(k, _)| *k == key));
        if fresh {
            cache = Some((key, coefficient_table(coef, t_mid, &x, &v)));
        }
        let table = &cache.as_ref().expect("table filled above").1;
        diffusion(&mut scratch, table, &v, dt);
        transport(&scratch, &mut state, &x, &v, 0.5 * dt);

        if state.iter().any(|s| !s.is_finite()) {
            return Err(Error::Divergence { step: n });
        }
        if ranges[0].contains(&n) {
            let base = (n - ranges[0].start) * slab;
            let mut p = base;
            for ix in ranges[1].clone() {
                for iv in ranges[2].clone() {
                    let k = ix * nv + iv;
                    out.data[p] = 0.5 * (prev[k] + state[k]);
                    p += 1;
                }
            }
        }
    }

    let safe = [
        (grid.t.lo + grid.padding[0], grid.t.hi - grid.padding[0]),
        (x.lo + grid.padding[1], x.hi - grid.padding[1]),
        (v.lo + grid.padding[2], v.hi - grid.padding[2]),
    ];
    for k in 0..3 {
        let a = out.axes[k];
        out.padding[k] = (safe[k].0 - a.lo).max(a.hi - safe[k].1).max(0.0);
    }
    out.metadata.insert("scheme".into(), "strang/semi-lagrangian-cubic/backward-euler".into());
    out.metadata.insert("coefficients".into(), serde_json::to_string(coef)?);
    out.metadata.insert("grid".into(), serde_json::to_string(grid)?);
    Ok(out)
}
