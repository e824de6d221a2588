//! Fixtures shared by the benchmarks.

use hypokin::solver::grid::Axis;
use hypokin::solver::scheme::SolveGrid;
use hypokin::suite::EnsembleSpec;

/// The default ensemble on a grid coarsened by `factor` in every axis.
pub fn coarse_ensemble(factor: usize) -> EnsembleSpec {
    let spec = EnsembleSpec::default();
    let g = spec.grid;
    let axis = |a: Axis| Axis { n: a.n / factor, ..a };
    let mut grid = SolveGrid::new(axis(g.t), axis(g.x), axis(g.v));
    grid.record = g.record;
    let steps = [grid.t.step(), grid.x.step(), grid.v.step()];
    EnsembleSpec { grid, cell: steps.map(|h| 4.0 * h), ..spec }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_grid_is_stable() {
        let s = coarse_ensemble(2);
        assert_eq!(s.shape(), [80, 128, 80]);
        s.grid.check().unwrap();
    }
}
