//! Piecewise-constant coefficient fields `A`, `B`, `S` on a space-time lattice.
//!
//! Cell values are drawn from a ChaCha stream positioned by the cell index,
//! so a field is reproducible from its seed alone and independent of the
//! grid or box it is sampled on.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::PhasePoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum CoefficientModel {
    Rough {
        seed: u64,
        lambda: f64,
        #[serde(rename = "Lambda")]
        cap_lambda: f64,
        b_amp: f64,
        s_amp: f64,
        /// Lattice cell size in `t`, `x`, `v`.
        cell: [f64; 3],
    },
    Constant {
        a: f64,
        b: f64,
        s: f64,
    },
}

/// Where the field sits: values at `z` are read at `(origin⁻¹ ∘ z) / R` and
/// rescaled so that the transported coefficients stay in the class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub origin: PhasePoint,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    #[serde(flatten)]
    pub model: CoefficientModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<Placement>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub s: f64,
}

const STREAM_A: u64 = 1;
const STREAM_B: u64 = 2;
const STREAM_S: u64 = 3;

fn pack(i: [i64; 3]) -> u128 {
    const BITS: u32 = 21;
    const MASK: i64 = (1 << BITS) - 1;
    let c = |k: i64| ((k + (1 << (BITS - 1))) & MASK) as u128;
    (c(i[0]) << (2 * BITS)) | (c(i[1]) << BITS) | c(i[2])
}

fn uniform(seed: u64, stream: u64, cell: [i64; 3]) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    // Each draw consumes a 64-bit word pair; give every cell its own block.
    rng.set_word_pos(pack(cell) * 16);
    rng.gen::<f64>()
}

/// i.i.d. uniform cells: `A ∈ [λ, Λ]`, `B ∈ [−Λ, Λ]`, `S ∈ [−S_amp, S_amp]`.
pub fn make_rough_coefficients(seed: u64, lambda: f64, cap_lambda: f64, cell_size: [f64; 3], s_amp: f64) -> Result<CoefficientField> {
    CoefficientField::rough(seed, lambda, cap_lambda, cap_lambda, s_amp, cell_size)
}

impl CoefficientField {
    pub fn rough(seed: u64, lambda: f64, cap_lambda: f64, b_amp: f64, s_amp: f64, cell: [f64; 3]) -> Result<Self> {
        if !(lambda > 0.0 && cap_lambda >= lambda && cap_lambda.is_finite()) {
            return Err(invalid(format!("need 0 < lambda <= Lambda, got {lambda}, {cap_lambda}")));
        }
        if !(0.0..=cap_lambda).contains(&b_amp) {
            return Err(invalid("drift amplitude must lie in [0, Lambda]"));
        }
        if !(s_amp >= 0.0 && s_amp.is_finite()) {
            return Err(invalid("source amplitude must be finite and nonnegative"));
        }
        if cell.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(invalid("cell sizes must be positive"));
        }
        Ok(Self { model: CoefficientModel::Rough { seed, lambda, cap_lambda, b_amp, s_amp, cell }, placement: None })
    }

    pub fn constant(a: f64, b: f64, s: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b.is_finite() && s.is_finite()) {
            return Err(invalid("constant coefficients need a > 0 and finite b, s"));
        }
        Ok(Self { model: CoefficientModel::Constant { a, b, s }, placement: None })
    }

    pub fn placed(mut self, origin: PhasePoint, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(invalid("placement scale must be positive"));
        }
        self.placement = Some(Placement { origin, scale });
        Ok(self)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.model, CoefficientModel::Constant { .. })
    }

    /// Lattice cell containing `z` in the field's own coordinates, if rough.
    pub fn cell_index(&self, z: &PhasePoint) -> Option<[i64; 3]> {
        let CoefficientModel::Rough { cell, .. } = self.model else {
            return None;
        };
        let u = self.local(z).0;
        Some([(u.t / cell[0]).floor() as i64, (u.x[0] / cell[1]).floor() as i64, (u.v[0] / cell[2]).floor() as i64])
    }

    fn local(&self, z: &PhasePoint) -> (PhasePoint, f64) {
        match self.placement {
            None => (*z, 1.0),
            Some(p) => (p.origin.inverse().compose(z).scale(1.0 / p.scale), p.scale),
        }
    }

    pub fn at(&self, z: &PhasePoint) -> Coefficients {
        let (u, r) = self.local(z);
        let c = match self.model {
            CoefficientModel::Constant { a, b, s } => Coefficients { a, b, s },
            CoefficientModel::Rough { seed, lambda, cap_lambda, b_amp, s_amp, cell } => {
                let idx = [(u.t / cell[0]).floor() as i64, (u.x[0] / cell[1]).floor() as i64, (u.v[0] / cell[2]).floor() as i64];
                Coefficients {
                    a: lambda + (cap_lambda - lambda) * uniform(seed, STREAM_A, idx),
                    b: if b_amp > 0.0 { b_amp * (2.0 * uniform(seed, STREAM_B, idx) - 1.0) } else { 0.0 },
                    s: if s_amp > 0.0 { s_amp * (2.0 * uniform(seed, STREAM_S, idx) - 1.0) } else { 0.0 },
                }
            }
        };
        Coefficients { a: c.a, b: c.b / r, s: c.s / (r * r) }
    }

    /// Values at many points, drawing each lattice cell once.
    pub fn at_many(&self, zs: &[PhasePoint]) -> Vec<Coefficients> {
        self.memoized(zs, |z| self.at(z))
    }

    /// `S` at many points.
    pub fn source_many(&self, zs: &[PhasePoint]) -> Vec<f64> {
        self.memoized(zs, |z| self.source_at(z))
    }

    fn memoized<T: Copy>(&self, zs: &[PhasePoint], eval: impl Fn(&PhasePoint) -> T) -> Vec<T> {
        if self.is_constant() {
            return zs.iter().map(eval).collect();
        }
        let mut seen: HashMap<[i64; 3], T> = HashMap::new();
        zs.iter()
            .map(|z| {
                let key = self.cell_index(z).expect("rough field has cells");
                *seen.entry(key).or_insert_with(|| eval(z))
            })
            .collect()
    }

    pub fn source_at(&self, z: &PhasePoint) -> f64 {
        match self.model {
            CoefficientModel::Rough { seed, s_amp, .. } => {
                if s_amp == 0.0 {
                    return 0.0;
                }
                let (_, r) = self.local(z);
                let idx = self.cell_index(z).expect("rough field has cells");
                s_amp * (2.0 * uniform(seed, STREAM_S, idx) - 1.0) / (r * r)
            }
            CoefficientModel::Constant { .. } => self.at(z).s,
        }
    }

    /// `sup |S|` over the whole field.
    pub fn s_sup(&self) -> f64 {
        let r = self.placement.map_or(1.0, |p| p.scale);
        let s = match self.model {
            CoefficientModel::Constant { s, .. } => s.abs(),
            CoefficientModel::Rough { s_amp, .. } => s_amp,
        };
        s / (r * r)
    }

    /// Ellipticity bounds `(λ, Λ)`.
    pub fn bounds(&self) -> (f64, f64) {
        match self.model {
            CoefficientModel::Constant { a, .. } => (a, a),
            CoefficientModel::Rough { lambda, cap_lambda, .. } => (lambda, cap_lambda),
        }
    }

    /// The same field with `S` negated, as seen by `−f`.
    pub fn negated_source(&self) -> Self {
        let mut c = *self;
        c.model = match c.model {
            CoefficientModel::Constant { a, b, s } => CoefficientModel::Constant { a, b, s: -s },
            m @ CoefficientModel::Rough { .. } => m,
        };
        c
    }

    pub fn seed(&self) -> Option<u64> {
        match self.model {
            CoefficientModel::Rough { seed, .. } => Some(seed),
            CoefficientModel::Constant { .. } => None,
        }
    }
}
