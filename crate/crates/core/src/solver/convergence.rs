//! Grid-refinement studies of the solver.

use serde::{Deserialize, Serialize};

use super::coefficients::CoefficientField;
use super::grid::{Axis, GridFunction};
use super::scheme::{solve, SolveGrid};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceCase {
    /// `∂_t f + v ∂_x f = 0` with smooth periodic data, against the exact
    /// characteristics solution.
    Transport,
    /// `∂_t f = ∂_vv f` with `Δt ∝ Δv²`, against the exact cosine mode.
    Diffusion,
    /// Full equation with rough coefficients, against the finest level.
    Splitting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub case: ConvergenceCase,
    /// Spacing of the refined variable at each level.
    pub spacings: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `ln error` against `ln spacing`.
    pub order: f64,
    /// `false` if some refinement did not reduce the error.
    pub monotone: bool,
    pub reference: String,
}

fn fit(h: &[f64], e: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Sup distance to `exact`, which is averaged over the two time levels that
/// bound each stored row, as the solver does.
fn sup_error(g: &GridFunction, exact: impl Fn(f64, f64, f64) -> f64) -> f64 {
    let [at, ax, av] = g.axes;
    let h = 0.5 * at.step();
    let mut worst: f64 = 0.0;
    for i in 0..at.n {
        let t = at.node(i);
        for j in 0..ax.n {
            for k in 0..av.n {
                let (x, v) = (ax.node(j), av.node(k));
                let e = 0.5 * (exact(t - h, x, v) + exact(t + h, x, v));
                worst = worst.max((g.at(i, j, k) - e).abs());
            }
        }
    }
    worst
}

/// Root-mean-square distance to `fine` over the nodes of `g` with
/// `|x|, |v| ≤ 1`.
fn rms_against(g: &GridFunction, fine: &GridFunction) -> f64 {
    let [at, ax, av] = g.axes;
    let (mut s, mut n) = (0.0, 0usize);
    for i in 0..at.n {
        for j in 0..ax.n {
            for k in 0..av.n {
                let (t, x, v) = (at.node(i), ax.node(j), av.node(k));
                if x.abs() <= 1.0 && v.abs() <= 1.0 {
                    let d = g.at(i, j, k) - fine.interpolate(t, x, v);
                    s += d * d;
                    n += 1;
                }
            }
        }
    }
    (s / n as f64).sqrt()
}

/// Run `case` on `levels` successively halved grids.
pub fn convergence_study(case: ConvergenceCase, levels: usize) -> Result<ConvergenceStudy> {
    if levels < 3 {
        return Err(invalid("a convergence study needs at least three levels"));
    }
    let mut spacings = Vec::with_capacity(levels);
    let mut errors = Vec::with_capacity(levels);
    let reference;
    match case {
        ConvergenceCase::Transport => {
            let f0 = |x: f64, v: f64| (std::f64::consts::PI * x).sin().exp() * (1.0 + 0.5 * v);
            let exact = |t: f64, x: f64, v: f64| f0(x - v * t, v);
            // Negligible diffusion: the velocity stage is the identity.
            let coef = CoefficientField::constant(1e-300, 0.0, 0.0)?;
            for l in 0..levels {
                let nx = 16usize << l;
                let grid = SolveGrid::new(Axis::new(0.0, 0.5, nx / 4)?, Axis::new(-1.0, 1.0, nx)?, Axis::new(-1.0, 1.0, 8)?);
                let g = solve(&f0, &coef, &grid)?;
                spacings.push(grid.x.step());
                errors.push(sup_error(&g, exact));
            }
            reference = "exact characteristics f0(x - v t, v)".to_string();
        }
        ConvergenceCase::Diffusion => {
            let pi = std::f64::consts::PI;
            let f0 = |_: f64, v: f64| (pi * v).cos();
            let exact = |t: f64, _: f64, v: f64| (-pi * pi * t).exp() * (pi * v).cos();
            let coef = CoefficientField::constant(1.0, 0.0, 0.0)?;
            for l in 0..levels {
                let nv = 16usize << l;
                let grid = SolveGrid::new(Axis::new(0.0, 0.25, nv * nv / 16)?, Axis::new(-1.0, 1.0, 4)?, Axis::new(-1.0, 1.0, nv)?);
                let g = solve(&f0, &coef, &grid)?;
                spacings.push(grid.v.step());
                errors.push(sup_error(&g, exact));
            }
            reference = "exact mode exp(-pi^2 t) cos(pi v)".to_string();
        }
        ConvergenceCase::Splitting => {
            let f0 = |x: f64, v: f64| (-(x * x + v * v)).exp();
            let coef = CoefficientField::rough(1, 0.5, 2.0, 2.0, 0.25, [0.125, 0.25, 0.25])?;
            let base = SolveGrid::new(Axis::new(0.0, 0.5, 16)?, Axis::new(-2.0, 2.0, 32)?, Axis::new(-2.0, 2.0, 16)?);
            let fine = solve(&f0, &coef, &base.refined(1 << levels))?;
            for l in 0..levels {
                let grid = base.refined(1 << l);
                let g = solve(&f0, &coef, &grid)?;
                spacings.push(grid.t.step());
                errors.push(rms_against(&g, &fine));
            }
            reference = format!("finest grid, refined {}x", 1 << levels);
        }
    }
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let order = fit(&spacings, &errors);
    Ok(ConvergenceStudy { case, spacings, errors, order, monotone, reference })
}
