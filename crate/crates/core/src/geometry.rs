//! Galilean group, kinetic scaling and the cylinder families of the regularity theory.
//!
//! A cylinder is stored as an anchor point `z` together with a time window
//! `(a, b]` and two radii, and stands for the set
//! `z ∘ ((a, b] × B_ρx × B_ρv)`. Every family used by the estimates is of
//! this form, so membership, volume, intersection and inclusion are decided
//! once for all kinds.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};

/// A point `(t, x, v)` of kinetic phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<const D: usize = 1> {
    pub t: f64,
    pub x: [f64; D],
    pub v: [f64; D],
}

impl<const D: usize> PhasePoint<D> {
    pub const fn new(t: f64, x: [f64; D], v: [f64; D]) -> Self {
        Self { t, x, v }
    }

    pub const fn origin() -> Self {
        Self { t: 0.0, x: [0.0; D], v: [0.0; D] }
    }

    /// Pure time shift `(t, 0, 0)`.
    pub const fn time(t: f64) -> Self {
        Self { t, x: [0.0; D], v: [0.0; D] }
    }

    /// `self ∘ z = (t0 + t, x0 + x + t v0, v0 + v)`.
    pub fn compose(&self, z: &Self) -> Self {
        let mut out = *self;
        out.t += z.t;
        for i in 0..D {
            out.x[i] += z.x[i] + z.t * self.v[i];
            out.v[i] += z.v[i];
        }
        out
    }

    /// Group inverse `(-t, -x + t v, -v)`.
    pub fn inverse(&self) -> Self {
        let mut out = Self::origin();
        out.t = -self.t;
        for i in 0..D {
            out.x[i] = -self.x[i] + self.t * self.v[i];
            out.v[i] = -self.v[i];
        }
        out
    }

    /// Kinetic dilation `(r² t, r³ x, r v)`.
    pub fn scale(&self, r: f64) -> Self {
        let mut out = *self;
        out.t *= r * r;
        for i in 0..D {
            out.x[i] *= r * r * r;
            out.v[i] *= r;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().chain(&self.v).all(|c| c.is_finite())
    }

    /// Euclidean norm of the difference on `ℝ^{1+2d}`.
    pub fn euclidean_distance(&self, other: &Self) -> f64 {
        let mut s = (self.t - other.t).powi(2);
        for i in 0..D {
            s += (self.x[i] - other.x[i]).powi(2) + (self.v[i] - other.v[i]).powi(2);
        }
        s.sqrt()
    }
}

impl<const D: usize> Default for PhasePoint<D> {
    fn default() -> Self {
        Self::origin()
    }
}

/// Composition on points given as slices, for callers whose dimension is
/// only known at run time.
pub fn group_compose(z0: (f64, &[f64], &[f64]), z: (f64, &[f64], &[f64])) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let d = z0.1.len();
    if z0.2.len() != d || z.1.len() != d || z.2.len() != d {
        return Err(invalid("phase points must share the dimension of x and v"));
    }
    let x = (0..d).map(|i| z0.1[i] + (z.1[i] + z.0 * z0.2[i])).collect();
    let v = (0..d).map(|i| z0.2[i] + z.2[i]).collect();
    Ok((z0.0 + z.0, x, v))
}

/// Checked kinetic dilation.
pub fn scale<const D: usize>(r: f64, z: &PhasePoint<D>) -> Result<PhasePoint<D>> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("scaling factor must be positive, got {r}")));
    }
    Ok(z.scale(r))
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    t: f64,
    x: Vec<f64>,
    v: Vec<f64>,
}

impl<const D: usize> Serialize for PhasePoint<D> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PointRepr { t: self.t, x: self.x.to_vec(), v: self.v.to_vec() }.serialize(s)
    }
}

impl<'de, const D: usize> Deserialize<'de> for PhasePoint<D> {
    fn deserialize<De: Deserializer<'de>>(de: De) -> Result<Self, De::Error> {
        let r = PointRepr::deserialize(de)?;
        let x = r.x.try_into().map_err(|_| De::Error::custom(format!("x must have {D} components")))?;
        let v = r.v.try_into().map_err(|_| De::Error::custom(format!("v must have {D} components")))?;
        Ok(Self { t: r.t, x, v })
    }
}

/// Volume of the Euclidean unit ball in `ℝ^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// The cylinder families used across the estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CylinderKind {
    /// `Q_r(z) = z ∘ [r Q_1]`, time window `(-r², 0]`.
    Centered,
    /// `Q_r^-(z) = Q_r(z ∘ (-2r², 0, 0))`.
    Past,
    /// `Q_r(z ∘ (-r², 0, 0))`: a past cylinder glued to `Q_r(z)` without a gap.
    AdjacentPast,
    /// `Q^+_{r/2}(z) = Q_{r/2}(z ∘ (2r², 0, 0))`.
    Future,
    /// `Q̃^-`: `Q_{r0/2}` (or `Q_{r0/4}` when `quarter`) centred at `z ∘ (-19/8 r0², 0, 0)`.
    TildePast { quarter: bool },
    /// `𝔠_r[z] = z ∘ Q_{2r}((2r², 0, 0))`.
    Covering,
    /// `𝔠_r[z]^+ = z ∘ (9r², 10r²] × B_{r³} × B_r`.
    CoveringMate,
    /// `𝒬^k = Q_{r0/2 + α_k}((-5/2 r0² + (r0/2 + α_k)²/2, 0, 0))`, `α_k = r0 / (2·7^{k-1})`.
    Nested { k: u32 },
}

/// A cylinder `anchor ∘ ((t_lo, t_hi] × B_rx × B_rv)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticCylinder<const D: usize = 1> {
    #[serde(flatten)]
    pub kind: CylinderKind,
    pub center: PhasePoint<D>,
    pub radius: f64,
    pub anchor: PhasePoint<D>,
    pub t_lo: f64,
    pub t_hi: f64,
    pub rx: f64,
    pub rv: f64,
}

fn window(r: f64) -> (f64, f64, f64, f64) {
    (-r * r, 0.0, r * r * r, r)
}

impl<const D: usize> KineticCylinder<D> {
    pub fn new(kind: CylinderKind, center: PhasePoint<D>, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid(format!("cylinder radius must be positive, got {r}")));
        }
        if !center.is_finite() {
            return Err(invalid("cylinder center must be finite"));
        }
        let r2 = r * r;
        let (shift, (lo, hi, rx, rv)) = match kind {
            CylinderKind::Centered => (0.0, window(r)),
            CylinderKind::Past => (-2.0 * r2, window(r)),
            CylinderKind::AdjacentPast => (-r2, window(r)),
            CylinderKind::Future => (2.0 * r2, window(r / 2.0)),
            CylinderKind::TildePast { quarter } => {
                let rho = if quarter { r / 4.0 } else { r / 2.0 };
                (-19.0 / 8.0 * r2, window(rho))
            }
            CylinderKind::Covering => {
                let (lo, hi, rx, rv) = window(2.0 * r);
                (2.0 * r2, (lo, hi, rx, rv))
            }
            CylinderKind::CoveringMate => (0.0, (9.0 * r2, 10.0 * r2, r2 * r, r)),
            CylinderKind::Nested { k } => {
                if k == 0 {
                    return Err(invalid("nested cylinders are indexed from k = 1"));
                }
                let alpha = r / (2.0 * 7f64.powi(k as i32 - 1));
                let rho = r / 2.0 + alpha;
                (-2.5 * r2 + 0.5 * rho * rho, window(rho))
            }
        };
        Ok(Self { kind, center, radius: r, anchor: center, t_lo: lo + shift, t_hi: hi + shift, rx, rv })
    }

    pub fn centered(center: PhasePoint<D>, r: f64) -> Result<Self> {
        Self::new(CylinderKind::Centered, center, r)
    }

    /// Absolute time window `(lo, hi]`.
    pub fn time_window(&self) -> (f64, f64) {
        (self.anchor.t + self.t_lo, self.anchor.t + self.t_hi)
    }

    /// Center of the x-ball at absolute time `t`.
    pub fn x_center(&self, t: f64) -> [f64; D] {
        let s = t - self.anchor.t;
        let mut c = self.anchor.x;
        for i in 0..D {
            c[i] += s * self.anchor.v[i];
        }
        c
    }

    /// Half-open in time, open in `x` and `v`.
    pub fn contains(&self, z: &PhasePoint<D>) -> bool {
        let s = z.t - self.anchor.t;
        if !(s > self.t_lo && s <= self.t_hi) {
            return false;
        }
        let mut dx = 0.0;
        let mut dv = 0.0;
        for i in 0..D {
            dx += (z.x[i] - self.anchor.x[i] - s * self.anchor.v[i]).powi(2);
            dv += (z.v[i] - self.anchor.v[i]).powi(2);
        }
        dx.sqrt() < self.rx && dv.sqrt() < self.rv
    }

    pub fn volume(&self) -> f64 {
        let w = unit_ball_volume(D);
        (self.t_hi - self.t_lo) * w * self.rx.powi(D as i32) * w * self.rv.powi(D as i32)
    }

    /// Image under `z ↦ origin ∘ (R z)`.
    pub fn transformed(&self, origin: &PhasePoint<D>, scale: f64) -> Self {
        let s2 = scale * scale;
        Self {
            kind: self.kind,
            center: origin.compose(&self.center.scale(scale)),
            radius: self.radius * scale,
            anchor: origin.compose(&self.anchor.scale(scale)),
            t_lo: self.t_lo * s2,
            t_hi: self.t_hi * s2,
            rx: self.rx * s2 * scale,
            rv: self.rv * scale,
        }
    }

    /// Map a point of the reference box `(s, y, w) ∈ (t_lo, t_hi] × B_rx × B_rv`
    /// into the cylinder.
    pub fn from_local(&self, s: f64, y: [f64; D], w: [f64; D]) -> PhasePoint<D> {
        self.anchor.compose(&PhasePoint::new(s, y, w))
    }

    /// Exact test for a common point.
    pub fn intersects(&self, other: &Self) -> bool {
        let (lo1, hi1) = self.time_window();
        let (lo2, hi2) = other.time_window();
        let lo = lo1.max(lo2);
        let hi = hi1.min(hi2);
        if lo >= hi {
            return false;
        }
        let dv = norm(&sub(&self.anchor.v, &other.anchor.v));
        if dv >= self.rv + other.rv {
            return false;
        }
        // Distance between the two x-centers is affine in t.
        let d_lo = sub(&self.x_center(lo), &other.x_center(lo));
        let d_hi = sub(&self.x_center(hi), &other.x_center(hi));
        min_segment_norm(&d_lo, &d_hi) < self.rx + other.rx
    }

    /// Exact test for `self ⊂ other`, up to boundaries of measure zero.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        let (lo1, hi1) = self.time_window();
        let (lo2, hi2) = other.time_window();
        if lo1 < lo2 || hi1 > hi2 {
            return false;
        }
        let dv = norm(&sub(&self.anchor.v, &other.anchor.v));
        if dv + self.rv > other.rv {
            return false;
        }
        [lo1, hi1].iter().all(|&t| norm(&sub(&self.x_center(t), &other.x_center(t))) + self.rx <= other.rx)
    }
}

fn sub<const D: usize>(a: &[f64; D], b: &[f64; D]) -> [f64; D] {
    let mut c = *a;
    for i in 0..D {
        c[i] -= b[i];
    }
    c
}

fn norm<const D: usize>(a: &[f64; D]) -> f64 {
    a.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn min_segment_norm<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let e = sub(b, a);
    let ee: f64 = e.iter().map(|c| c * c).sum();
    if ee == 0.0 {
        return norm(a);
    }
    let lam = (-(0..D).map(|i| a[i] * e[i]).sum::<f64>() / ee).clamp(0.0, 1.0);
    let mut p = *a;
    for i in 0..D {
        p[i] += lam * e[i];
    }
    norm(&p)
}

/// The covering property used in the Vitali selection: two intersecting
/// covering cylinders with `r1 ≤ 2 r2` satisfy `𝔠_{r1}[z1] ⊂ 𝔠_{5 r2}[z2]`.
///
/// Returns whether the implication holds for the given pair.
pub fn vitali_inclusion_check<const D: usize>(c1: &KineticCylinder<D>, c2: &KineticCylinder<D>) -> Result<bool> {
    if c1.kind != CylinderKind::Covering || c2.kind != CylinderKind::Covering {
        return Err(invalid("the inclusion property is stated for covering cylinders"));
    }
    if !(c1.intersects(c2) && c1.radius <= 2.0 * c2.radius) {
        return Ok(true);
    }
    let big = KineticCylinder::new(CylinderKind::Covering, c2.center, 5.0 * c2.radius)?;
    Ok(c1.is_subset_of(&big))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_matches_hand_value() {
        let z0 = PhasePoint::new(1.0, [2.0], [3.0]);
        let z = PhasePoint::new(1.0, [1.0], [1.0]);
        assert_eq!(z0.compose(&z), PhasePoint::new(2.0, [6.0], [4.0]));
        assert_eq!(z0.inverse(), PhasePoint::new(-1.0, [1.0], [-3.0]));
        assert_eq!(z.scale(2.0), PhasePoint::new(4.0, [8.0], [2.0]));
    }

    #[test]
    fn slice_compose_rejects_mismatch() {
        assert!(group_compose((0.0, &[1.0], &[1.0]), (0.0, &[1.0, 2.0], &[1.0, 2.0])).is_err());
        let (t, x, v) = group_compose((1.0, &[2.0], &[3.0]), (1.0, &[1.0], &[1.0])).unwrap();
        assert_eq!((t, x, v), (2.0, vec![6.0], vec![4.0]));
    }

    #[test]
    fn past_cylinder_window() {
        let q = KineticCylinder::new(CylinderKind::Past, PhasePoint::<1>::origin(), 1.0).unwrap();
        assert_eq!(q.time_window(), (-3.0, -2.0));
        assert_eq!((q.rx, q.rv), (1.0, 1.0));
    }

    #[test]
    fn nested_first_radius() {
        let q = KineticCylinder::new(CylinderKind::Nested { k: 1 }, PhasePoint::<1>::origin(), 0.05).unwrap();
        assert!((q.rv - 0.05).abs() < 1e-15);
        assert!(KineticCylinder::new(CylinderKind::Nested { k: 0 }, PhasePoint::<1>::origin(), 0.05).is_err());
    }

    #[test]
    fn boundary_membership() {
        let q = KineticCylinder::centered(PhasePoint::<1>::origin(), 1.0).unwrap();
        assert!(q.contains(&PhasePoint::origin()));
        assert!(!q.contains(&PhasePoint::time(-1.0)));
        assert!(q.contains(&PhasePoint::new(-0.5, [0.3], [0.9])));
    }

    #[test]
    fn volumes() {
        let q = KineticCylinder::centered(PhasePoint::<1>::origin(), 1.0).unwrap();
        assert_eq!(q.volume(), 4.0);
        let h = KineticCylinder::centered(PhasePoint::<1>::origin(), 0.5).unwrap();
        assert_eq!(h.volume(), 1.0 / 16.0);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn serde_round_trip() {
        let q = KineticCylinder::new(CylinderKind::TildePast { quarter: true }, PhasePoint::new(0.1, [0.2], [0.3]), 0.05).unwrap();
        let s = serde_json::to_string(&q).unwrap();
        let back: KineticCylinder = serde_json::from_str(&s).unwrap();
        assert_eq!(q, back);
    }
}
