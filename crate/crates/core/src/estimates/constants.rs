//! The explicit constants of the intermediate value lemma, the
//! measure-to-pointwise lemma and the oscillation decay.
//!
//! `θ` and `ν` are tiny but representable; `μ = θ^{1+1/ν}/2` and the Hölder
//! exponent are not, so they are carried as `ln(−ln μ)` and `ln(−ln α)`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::unit_ball_volume;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantInputs {
    pub d: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub s_inf: f64,
    pub sigma: f64,
    pub c_universal: f64,
    pub delta0: f64,
}

impl ConstantInputs {
    pub fn new(d: usize, delta1: f64, delta2: f64, s_inf: f64) -> Self {
        Self { d, delta1, delta2, s_inf, sigma: 0.25, c_universal: 10.0, delta0: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaperConstants {
    pub inputs: ConstantInputs,
    /// Radius of the intermediate value lemma.
    pub r0: f64,
    /// Radius of the measure-to-pointwise lemma with `δ = δ1`.
    pub r0_increase: f64,
    /// Radius of the oscillation reduction.
    pub r0_holder: f64,
    pub ln_eps: f64,
    pub ln_theta: f64,
    pub ln_nu: f64,
    pub ln_neg_ln_mu: f64,
    pub ln_neg_ln_alpha: f64,
    pub ln_zeta: f64,
}

/// `ln(e^a + e^b)`.
fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

impl PaperConstants {
    pub fn new(inp: ConstantInputs) -> Result<Self> {
        let ConstantInputs { d, delta1, delta2, s_inf, sigma, c_universal: c, delta0 } = inp;
        if d == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        for (name, v) in [("delta1", delta1), ("delta2", delta2), ("delta0", delta0)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(sigma > 0.0 && sigma < 1.0 / 3.0) {
            return Err(invalid(format!("sigma must lie in (0, 1/3), got {sigma}")));
        }
        if !(c >= 1.0 && c.is_finite()) {
            return Err(invalid(format!("the universal constant must be at least 1, got {c}")));
        }
        if !(s_inf >= 0.0 && s_inf.is_finite()) {
            return Err(invalid(format!("source bound must be finite and nonnegative, got {s_inf}")));
        }
        let df = d as f64;
        let r0 = if s_inf == 0.0 { 1.0 / 20.0 } else { (1.0 / 20.0f64).min((delta1 / (400.0 * (1.0 + s_inf))).sqrt()) };
        let r0_increase = if s_inf == 0.0 { 1.0 / 20.0 } else { (delta1 / 800.0).sqrt() };
        let r0_holder: f64 = 1.0 / 40.0;

        let ln_base = (delta1 * delta2 / (8.0 * c)).ln();
        let ln_eps = ln_base / sigma;
        let ln_k = c.ln() + s_inf.ln_1p() - (4.0 * df + 1.0) * r0.ln() - (df + 2.0) / sigma * ln_base;
        let ln_theta = 2.0 * (delta1 * delta2).ln() - 2.0 * (8f64.ln() + log_add(delta2.ln(), ln_k));

        let w = unit_ball_volume(d);
        let ln_q_half = (4.0 * df + 2.0) * 0.5f64.ln() + 2.0 * w.ln();
        let ln_nu = -ln_q_half + 2.0 * ((delta1 * delta2 / (4.0 * c)).ln() + (df + 2.0) / sigma * ln_base + (4.0 * df + 1.0) * r0.ln());

        // −ln μ = (1 + 1/ν)(−ln θ) + ln 2.
        let l = log_add(0.0, -ln_nu) + (-ln_theta).ln();
        let ln_neg_ln_mu = log_add(l, LN_2.ln());

        // 1 − μ/2 = r0^α.
        let ln_ln_r = (1.0 / r0_holder).ln().ln();
        let neg_ln_mu = ln_neg_ln_mu.exp();
        let ln_neg_ln_alpha = if neg_ln_mu < 700.0 {
            let mu = (-neg_ln_mu).exp();
            let alpha = -(-0.5 * mu).ln_1p() / (1.0 / r0_holder).ln();
            (-alpha.ln()).ln()
        } else {
            log_add(ln_neg_ln_mu, (LN_2 + ln_ln_r).ln())
        };
        let ln_zeta = (10.0 * df + 17.0) * delta0.ln();
        Ok(Self { inputs: inp, r0, r0_increase, r0_holder, ln_eps, ln_theta, ln_nu, ln_neg_ln_mu, ln_neg_ln_alpha, ln_zeta })
    }

    pub fn epsilon(&self) -> f64 {
        self.ln_eps.exp()
    }

    pub fn theta(&self) -> f64 {
        self.ln_theta.exp()
    }

    pub fn nu(&self) -> f64 {
        self.ln_nu.exp()
    }

    /// `−ln μ`; may be `+∞` in floating point.
    pub fn neg_ln_mu(&self) -> f64 {
        self.ln_neg_ln_mu.exp()
    }

    /// `μ`, zero when it underflows.
    pub fn mu(&self) -> f64 {
        (-self.neg_ln_mu()).exp()
    }

    pub fn neg_ln_alpha(&self) -> f64 {
        self.ln_neg_ln_alpha.exp()
    }

    pub fn alpha(&self) -> f64 {
        (-self.neg_ln_alpha()).exp()
    }

    pub fn zeta(&self) -> f64 {
        self.ln_zeta.exp()
    }

    /// `ln` of the factor `e^{2(1 + 2^{10d+16})}` in the oscillation reduction.
    pub fn ln_osc_factor(&self) -> f64 {
        2.0 * (1.0 + 2f64.powi(10 * self.inputs.d as i32 + 16))
    }

    /// `(1 − μ/2) · max(osc, e^{…} ‖S‖)`, evaluated without overflow.
    pub fn reduced_oscillation(&self, osc: f64, s_sup: f64) -> f64 {
        let threshold = if s_sup == 0.0 { 0.0 } else { (self.ln_osc_factor() + s_sup.ln()).exp() };
        osc.max(threshold) * (1.0 - 0.5 * self.mu())
    }

    /// Named values for report provenance.
    pub fn provenance(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("r0", self.r0),
            ("r0_increase", self.r0_increase),
            ("r0_holder", self.r0_holder),
            ("ln_epsilon", self.ln_eps),
            ("ln_theta", self.ln_theta),
            ("ln_nu", self.ln_nu),
            ("ln_neg_ln_mu", self.ln_neg_ln_mu),
            ("ln_neg_ln_alpha", self.ln_neg_ln_alpha),
            ("ln_zeta", self.ln_zeta),
            ("sigma", self.inputs.sigma),
            ("c_universal", self.inputs.c_universal),
            ("delta0", self.inputs.delta0),
        ]
    }
}

pub fn paper_constants(d: usize, delta1: f64, delta2: f64, s_inf: f64, sigma: f64, c_universal: f64) -> Result<PaperConstants> {
    PaperConstants::new(ConstantInputs { d, delta1, delta2, s_inf, sigma, c_universal, delta0: 0.01 })
}

/// `𝒞(r, R, v0)` of the energy estimate.
pub fn energy_constant(r: f64, big_r: f64, v0: f64) -> f64 {
    let g = big_r - r;
    1.0 + 1.0 / (g * g) + (v0.abs() + big_r) / (g * r * r) + 1.0 / (g * r)
}

/// `𝒞' = (1 + 1/(R − r)) 𝒞`.
pub fn energy_constant_prime(r: f64, big_r: f64, v0: f64) -> f64 {
    (1.0 + 1.0 / (big_r - r)) * energy_constant(r, big_r, v0)
}

/// `𝒞'' = R^{1+2d} 𝒞'`.
pub fn energy_constant_second(r: f64, big_r: f64, v0: f64, d: usize) -> f64 {
    big_r.powi(1 + 2 * d as i32) * energy_constant_prime(r, big_r, v0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_constant_by_hand() {
        assert_eq!(energy_constant(0.5, 1.0, 0.0), 17.0);
        assert_eq!(energy_constant_prime(0.5, 1.0, 0.0), 51.0);
        assert_eq!(energy_constant_second(0.5, 1.0, 0.0, 1), 51.0);
    }

    #[test]
    fn zero_source_fixes_radius() {
        let c = paper_constants(1, 0.3, 0.4, 0.0, 0.25, 10.0).unwrap();
        assert_eq!(c.r0, 0.05);
        assert_eq!(c.r0_increase, 0.05);
        let c = paper_constants(1, 0.3, 0.4, 2.0, 0.25, 10.0).unwrap();
        assert!(c.r0 < 0.05);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(paper_constants(1, 0.0, 0.5, 0.0, 0.25, 10.0).is_err());
        assert!(paper_constants(1, 0.5, 1.0, 0.0, 0.25, 10.0).is_err());
        assert!(paper_constants(1, 0.5, 0.5, 0.0, 0.4, 10.0).is_err());
        assert!(paper_constants(1, 0.5, 0.5, 0.0, 0.25, 0.5).is_err());
        assert!(paper_constants(1, 0.5, 0.5, -1.0, 0.25, 10.0).is_err());
    }

    #[test]
    fn log_add_is_stable() {
        assert!((log_add(0.0, 0.0) - LN_2).abs() < 1e-15);
        assert_eq!(log_add(1000.0, 0.0), 1000.0);
    }
}
