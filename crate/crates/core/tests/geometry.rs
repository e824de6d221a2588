use hypokin::geometry::{group_compose, scale, unit_ball_volume, vitali_inclusion_check};
use hypokin::{CylinderKind, KineticCylinder, PhasePoint};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = PhasePoint> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(t, x, v)| PhasePoint::new(t, [x], [v]))
}

fn point2() -> impl Strategy<Value = PhasePoint<2>> {
    prop::array::uniform5(-2.0..2.0f64).prop_map(|a| PhasePoint::new(a[0], [a[1], a[2]], [a[3], a[4]]))
}

fn close<const D: usize>(a: &PhasePoint<D>, b: &PhasePoint<D>) -> bool {
    a.euclidean_distance(b) <= 1e-12
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn composition_is_associative(a in point(), b in point(), c in point()) {
        prop_assert!(close(&a.compose(&b).compose(&c), &a.compose(&b.compose(&c))));
    }

    #[test]
    fn inverse_and_identity(a in point2()) {
        let e = PhasePoint::<2>::origin();
        prop_assert!(close(&a.compose(&a.inverse()), &e));
        prop_assert!(close(&a.inverse().compose(&a), &e));
        prop_assert!(close(&a.compose(&e), &a));
        prop_assert!(close(&e.compose(&a), &a));
    }

    #[test]
    fn dilation_is_a_group_automorphism(a in point(), b in point(), r in 0.1..3.0f64) {
        let lhs = a.compose(&b).scale(r);
        let rhs = a.scale(r).compose(&b.scale(r));
        prop_assert!(lhs.euclidean_distance(&rhs) <= 1e-11 * (1.0 + r.powi(3)));
    }

    #[test]
    fn slice_composition_agrees(a in point2(), b in point2()) {
        let (t, x, v) = group_compose((a.t, &a.x, &a.v), (b.t, &b.x, &b.v)).unwrap();
        let c = a.compose(&b);
        prop_assert_eq!(t, c.t);
        prop_assert_eq!(x, c.x.to_vec());
        prop_assert_eq!(v, c.v.to_vec());
    }

    #[test]
    fn membership_is_invariant(z0 in point(), w in point(), r in 0.2..2.0f64, s in 0.2..2.0f64) {
        // w ∈ Q  iff  z0 ∘ (s w) ∈ z0 ∘ (s Q).
        let q = KineticCylinder::centered(PhasePoint::origin(), r).unwrap();
        let image = q.transformed(&z0, s);
        let inside = q.contains(&w);
        let moved = z0.compose(&w.scale(s));
        // Points within round-off of the boundary may flip.
        let margin = (w.t + r * r).abs().min(w.t.abs()).min((w.x[0].abs() - r.powi(3)).abs()).min((w.v[0].abs() - r).abs());
        prop_assume!(margin > 1e-9);
        prop_assert_eq!(inside, image.contains(&moved));
    }

    #[test]
    fn translated_centered_cylinder_matches_definition(z0 in point(), r in 0.2..2.0f64) {
        let direct = KineticCylinder::centered(z0, r).unwrap();
        let image = KineticCylinder::centered(PhasePoint::origin(), 1.0).unwrap().transformed(&z0, r);
        prop_assert!((direct.volume() - image.volume()).abs() <= 1e-12 * direct.volume());
        prop_assert!(direct.time_window().0 - image.time_window().0 < 1e-12);
    }

    #[test]
    fn intersection_is_symmetric(a in point(), b in point(), r1 in 0.1..1.5f64, r2 in 0.1..1.5f64) {
        let c1 = KineticCylinder::centered(a, r1).unwrap();
        let c2 = KineticCylinder::new(CylinderKind::Past, b, r2).unwrap();
        prop_assert_eq!(c1.intersects(&c2), c2.intersects(&c1));
        if c1.is_subset_of(&c2) {
            prop_assert!(c1.intersects(&c2));
            prop_assert!(c1.volume() <= c2.volume());
        }
    }

    #[test]
    fn vitali_covering_pairs(z1 in point(), off in point(), r2 in 0.05..1.0f64, frac in 0.05..1.0f64) {
        let r1 = 2.0 * r2 * frac;
        let c1 = KineticCylinder::new(CylinderKind::Covering, z1, r1).unwrap();
        let c2 = KineticCylinder::new(CylinderKind::Covering, z1.compose(&off.scale(r2)), r2).unwrap();
        prop_assert!(vitali_inclusion_check(&c1, &c2).unwrap());
    }
}

#[test]
fn volume_scales_with_homogeneous_dimension() {
    let q1 = KineticCylinder::centered(PhasePoint::<1>::origin(), 1.0).unwrap().volume();
    assert_eq!(q1, 4.0);
    for r in [0.5, 0.25, 0.125, 2.0, 4.0] {
        let q = KineticCylinder::centered(PhasePoint::<1>::new(0.3, [1.0], [-2.0]), r).unwrap();
        assert_eq!(q.volume(), r.powi(6) * q1);
    }
    for r in [0.3, 0.7, 1.9] {
        let q = KineticCylinder::centered(PhasePoint::<1>::origin(), r).unwrap();
        assert!((q.volume() / (r.powi(6) * q1) - 1.0).abs() <= 4.0 * f64::EPSILON);
    }
    // 4d + 2 in two dimensions.
    let q1 = KineticCylinder::centered(PhasePoint::<2>::origin(), 1.0).unwrap().volume();
    let q = KineticCylinder::centered(PhasePoint::<2>::origin(), 0.5).unwrap().volume();
    assert_eq!(q, 0.5f64.powi(10) * q1);
    assert_eq!(q1, unit_ball_volume(2).powi(2));
}

#[test]
fn cylinder_family_time_windows() {
    let z = PhasePoint::<1>::new(1.0, [0.5], [0.25]);
    let r: f64 = 0.5;
    let win = |k| KineticCylinder::new(k, z, r).unwrap().time_window();
    assert_eq!(win(CylinderKind::Centered), (1.0 - r * r, 1.0));
    assert_eq!(win(CylinderKind::Past), (1.0 - 3.0 * r * r, 1.0 - 2.0 * r * r));
    assert_eq!(win(CylinderKind::AdjacentPast), (1.0 - 2.0 * r * r, 1.0 - r * r));
    let (lo, hi) = win(CylinderKind::Future);
    assert!((lo - (1.0 + 2.0 * r * r - r * r / 4.0)).abs() < 1e-15 && (hi - (1.0 + 2.0 * r * r)).abs() < 1e-15);
    assert_eq!(win(CylinderKind::CoveringMate), (1.0 + 9.0 * r * r, 1.0 + 10.0 * r * r));
    // A past cylinder and its future partner leave a gap.
    let past = KineticCylinder::new(CylinderKind::Past, z, r).unwrap();
    let fut = KineticCylinder::new(CylinderKind::Future, z, r).unwrap();
    assert!(!past.intersects(&fut));
    let adj = KineticCylinder::new(CylinderKind::AdjacentPast, z, r).unwrap();
    assert_eq!(adj.time_window().1, KineticCylinder::centered(z, r).unwrap().time_window().0);
}

#[test]
fn nested_family_decreases_to_half_cylinder() {
    let o = PhasePoint::<1>::origin();
    let r0 = 0.05;
    let cyl = |k| KineticCylinder::new(CylinderKind::Nested { k }, o, r0).unwrap();
    for k in 1..6 {
        assert!(cyl(k + 1).is_subset_of(&cyl(k)), "k = {k}");
    }
    assert!(KineticCylinder::new(CylinderKind::Nested { k: 0 }, o, r0).is_err());
}

#[test]
fn covering_cylinder_contains_its_center() {
    let z = PhasePoint::<1>::new(-0.2, [0.1], [0.3]);
    let c = KineticCylinder::new(CylinderKind::Covering, z, 0.3).unwrap();
    assert!(c.contains(&z.compose(&PhasePoint::time(1e-3))));
    assert!(vitali_inclusion_check(&KineticCylinder::centered(z, 0.3).unwrap(), &c).is_err());
}

#[test]
fn invalid_inputs_are_rejected() {
    let o = PhasePoint::<1>::origin();
    assert!(KineticCylinder::centered(o, 0.0).is_err());
    assert!(KineticCylinder::centered(o, f64::NAN).is_err());
    assert!(KineticCylinder::centered(PhasePoint::new(f64::INFINITY, [0.0], [0.0]), 1.0).is_err());
    assert!(scale(-1.0, &o).is_err());
    assert!(group_compose((0.0, &[0.0], &[0.0, 1.0]), (0.0, &[0.0], &[0.0])).is_err());
}
