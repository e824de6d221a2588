use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::KineticCylinder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The statement's hypotheses do not hold for this input; nothing asserted.
    HypothesesUnmet,
    /// Measured without a bound to compare against.
    Recorded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhsTerm {
    pub name: String,
    pub value: f64,
}

impl RhsTerm {
    pub fn new(name: &str, value: f64) -> Self {
        Self { name: name.to_string(), value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCylinder {
    pub role: String,
    pub cylinder: KineticCylinder,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_scale: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// One inequality `LHS ≤ C · RHS`, with `RHS` itemized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub statement: String,
    pub cylinders: Vec<NamedCylinder>,
    pub lhs: f64,
    pub rhs: f64,
    pub rhs_terms: Vec<RhsTerm>,
    /// `LHS / RHS` when `RHS > 0`.
    pub empirical_constant: Option<f64>,
    pub rhs_zero: bool,
    pub bound: Option<f64>,
    pub status: Status,
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

impl EstimateReport {
    /// Decide the status from `lhs`, the itemized right-hand side and an
    /// optional bound on `lhs / rhs`. A zero left-hand side always passes.
    pub fn new(statement: &str, lhs: f64, rhs_terms: Vec<RhsTerm>, bound: Option<f64>) -> Self {
        let rhs: f64 = rhs_terms.iter().map(|t| t.value).sum();
        let rhs_zero = rhs == 0.0;
        let empirical_constant = if rhs > 0.0 && rhs.is_finite() { Some(lhs / rhs) } else if rhs.is_infinite() { Some(0.0) } else { None };
        let status = if lhs == 0.0 {
            Status::Pass
        } else if rhs_zero || !lhs.is_finite() {
            Status::Fail
        } else {
            match (bound, empirical_constant) {
                (Some(b), Some(c)) if c <= b => Status::Pass,
                (Some(_), _) => Status::Fail,
                (None, _) => Status::Recorded,
            }
        };
        Self {
            statement: statement.to_string(),
            cylinders: Vec::new(),
            lhs,
            rhs,
            rhs_terms,
            empirical_constant,
            rhs_zero,
            bound,
            status,
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
            provenance: Provenance::default(),
        }
    }

    /// A report for a statement whose hypotheses failed.
    pub fn unmet(statement: &str, reason: &str) -> Self {
        let mut r = Self::new(statement, f64::NAN, Vec::new(), None);
        r.lhs = 0.0;
        r.status = Status::HypothesesUnmet;
        r.notes.push(reason.to_string());
        r
    }

    pub fn with_cylinder(mut self, role: &str, c: &KineticCylinder) -> Self {
        self.cylinders.push(NamedCylinder { role: role.to_string(), cylinder: *c });
        self
    }

    pub fn diag(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    pub fn passed(&self) -> bool {
        matches!(self.status, Status::Pass | Status::Recorded | Status::HypothesesUnmet)
    }

    /// Override the automatic decision (used by checks whose assertion is
    /// not of the form `LHS ≤ C · RHS`).
    pub fn decide(mut self, ok: bool) -> Self {
        self.status = if ok { Status::Pass } else { Status::Fail };
        self
    }
}

/// Flat summary: statement, seed, LHS, RHS, ratio, pass. Numbers are
/// written in their shortest round-trip form.
pub fn write_summary_csv<W: Write>(w: W, reports: &[EstimateReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["statement", "seed", "lhs", "rhs", "ratio", "pass"])?;
    for r in reports {
        out.write_record([
            r.statement.clone(),
            r.provenance.seed.map_or(String::new(), |s| s.to_string()),
            format!("{:?}", r.lhs),
            format!("{:?}", r.rhs),
            r.empirical_constant.map_or(String::new(), |c| format!("{c:?}")),
            r.passed().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_rules() {
        let r = EstimateReport::new("x", 0.0, vec![], Some(1.0));
        assert_eq!(r.status, Status::Pass);
        assert!(r.rhs_zero);
        let r = EstimateReport::new("x", 1.0, vec![RhsTerm::new("a", 0.0)], Some(1.0));
        assert_eq!(r.status, Status::Fail);
        let r = EstimateReport::new("x", 1.0, vec![RhsTerm::new("a", 0.5), RhsTerm::new("b", 0.5)], Some(1.0));
        assert_eq!((r.status, r.empirical_constant), (Status::Pass, Some(1.0)));
        let r = EstimateReport::new("x", 3.0, vec![RhsTerm::new("a", 1.0)], Some(2.0));
        assert_eq!(r.status, Status::Fail);
        let r = EstimateReport::new("x", 3.0, vec![RhsTerm::new("a", 1.0)], None);
        assert_eq!(r.status, Status::Recorded);
    }
}
