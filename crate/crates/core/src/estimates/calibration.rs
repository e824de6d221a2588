//! Pinned pass bounds for the `≲` checks.
//!
//! A calibration run records, per statement, the largest empirical constant
//! over a fixed seed list on the base grid; the pass bound is `factor` times
//! that maximum.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::report::EstimateReport;
use crate::error::Result;

const PINNED: &str = include_str!("../../data/calibration.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub version: u32,
    pub seeds: Vec<u64>,
    /// Base grid `(n_t, n_x, n_v)` of the calibration run.
    pub grid: [usize; 3],
    pub factor: f64,
    /// Consistency budget `C_tol` of the weak residual.
    pub c_tol: f64,
    /// Largest `residual / (Δt + Δx² + Δv²)` seen in the smooth runs `c_tol`
    /// was derived from.
    pub c_tol_observed: f64,
    pub max_constants: BTreeMap<String, f64>,
}

impl Calibration {
    /// The calibration shipped with the crate.
    pub fn pinned() -> Self {
        Self::from_json(PINNED).expect("shipped calibration file is valid")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// `factor × max` for a statement, if it was calibrated.
    pub fn bound(&self, statement: &str) -> Option<f64> {
        self.max_constants.get(statement).map(|m| self.factor * m)
    }

    /// Collect the per-statement maxima of `reports`.
    pub fn from_reports<'a>(seeds: Vec<u64>, grid: [usize; 3], c_tol_observed: f64, reports: impl IntoIterator<Item = &'a EstimateReport>) -> Self {
        let factor = 2.0;
        let mut max_constants = BTreeMap::new();
        for r in reports {
            if let Some(c) = r.empirical_constant.filter(|c| c.is_finite()) {
                let e = max_constants.entry(r.statement.clone()).or_insert(0.0f64);
                *e = e.max(c);
            }
        }
        Self { version: 1, seeds, grid, factor, c_tol: factor * c_tol_observed, c_tol_observed, max_constants }
    }
}
