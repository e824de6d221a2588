use hypokin::kernel::*;
use hypokin::solver::grid::{Axis, GridFunction};
use hypokin::PhasePoint;

#[test]
fn unit_mass_across_scales() {
    let q = KernelQuadrature::default();
    for t in [0.01, 1.0, 100.0] {
        let m = kernel_mass(t, 1, &q, 1e-7).unwrap();
        assert!((m - 1.0).abs() <= 1e-6, "t = {t}: mass {m}");
    }
    assert!(kernel_mass(0.0, 1, &q, 1e-7).is_err());
}

#[test]
fn too_narrow_window_is_reported() {
    let q = KernelQuadrature { sigmas: 1.0, ..Default::default() };
    assert!(matches!(kernel_mass(1.0, 1, &q, 1e-6), Err(hypokin::Error::QuadratureInsufficient { .. })));
}

#[test]
fn residual_converges_at_second_order() {
    let region = ResidualRegion::default();
    let r1 = kernel_pde_residual(&region, 0.01).unwrap();
    let r2 = kernel_pde_residual(&region, 0.005).unwrap();
    let ratio = r1 / r2;
    assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
    // Frozen calibration value of the max-norm residual at h = 0.01.
    assert!((r1 - 1.0023e-2).abs() <= 1e-5, "residual {r1}");
}

#[test]
fn wrong_kernel_is_detected() {
    let region = ResidualRegion::default();
    let wrong = |t: f64, x: f64, v: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let u = x - 0.5 * t * v;
        (3.0 / (4.0 * std::f64::consts::PI.powi(2) * t.powi(4))).sqrt() * (-3.0 * u * u / t.powi(3) - v * v / (2.0 * t)).exp()
    };
    let bad = pde_residual_of(wrong, &region, 0.01).unwrap();
    let good = kernel_pde_residual(&region, 0.01).unwrap();
    assert!(bad >= 0.1, "wrong kernel residual {bad}");
    assert!(bad >= 10.0 * good);
}

#[test]
fn gradients_match_differences() {
    let (t, x, v) = (1.0, 0.3, 0.2);
    let (gx, gv) = kernel_gradients(t, &[x], &[v]).unwrap();
    let mut prev = f64::NAN;
    for h in [1e-2, 5e-3] {
        let fx = (g1(t, x + h, v) - g1(t, x - h, v)) / (2.0 * h);
        let fv = (g1(t, x, v + h) - g1(t, x, v - h)) / (2.0 * h);
        let e = (fx - gx[0]).abs() + (fv - gv[0]).abs();
        if prev.is_finite() {
            assert!((3.5..4.5).contains(&(prev / e)), "ratio {}", prev / e);
        }
        prev = e;
    }
    let (zx, zv) = kernel_gradients(0.7, &[0.0], &[0.0]).unwrap();
    assert_eq!((zx[0], zv[0]), (0.0, 0.0));
    assert!(kernel_gradients(0.0, &[0.0], &[0.0]).is_err());
}

#[test]
fn gradient_bound_is_finite() {
    let mut worst: f64 = 0.0;
    for i in 1..=20 {
        let t = i as f64 * 0.1;
        for j in -10..=10 {
            for k in -10..=10 {
                let (x, v) = (j as f64 * 0.3, k as f64 * 0.3);
                let (gx, gv) = kernel_gradients(t, &[x], &[v]).unwrap();
                let u = x - 0.5 * t * v;
                let w = (1.5 * u * u / t.powi(3) + v * v / (8.0 * t)).exp();
                worst = worst.max(t.powf(2.5) * (gv[0].abs() + t * gx[0].abs()) * w);
            }
        }
    }
    assert!(worst.is_finite() && worst < 10.0, "{worst}");
}

#[test]
fn symmetric_and_nonnegative() {
    for (t, x, v) in [(0.3, 0.2, -0.4), (2.0, -1.0, 0.5), (1e-3, 1e-4, 0.01)] {
        assert_eq!(g1(t, x, v), g1(t, -x, -v));
        assert!(g1(t, x, v) >= 0.0);
    }
}

#[test]
fn split_reproduces_kernel() {
    let s = split_kernel(0.1).unwrap();
    for (t, x, v) in [(0.05, 0.0, 0.1), (0.15, 0.01, -0.2), (0.5, 0.1, 0.3)] {
        assert!((s.near(t, x, v) + s.far(t, x, v) - g1(t, x, v)).abs() <= 1e-14 * g1(t, x, v).max(1.0));
    }
    assert_eq!(s.far(0.05, 0.0, 0.1), 0.0);
    assert_eq!(s.near(0.25, 0.0, 0.1), 0.0);
    let q = KernelQuadrature::default();
    let ratios: Vec<f64> = [0.4, 0.1, 0.025].iter().map(|&e| split_kernel(e).unwrap().near_mass(1.0, &q).unwrap() / e.sqrt()).collect();
    assert!(ratios.iter().all(|r| r.is_finite() && *r < 2.0), "{ratios:?}");
}

#[test]
fn semigroup_property() {
    let q = KernelQuadrature { nodes: 300, ..Default::default() };
    let pts = [(0.1, 0.2), (-0.3, 0.5), (0.7, -0.4), (0.0, 0.0), (-0.5, -1.0), (1.0, 1.2), (0.25, -0.75), (-0.8, 0.3), (0.4, 0.9), (-0.1, -0.2)];
    for (x, v) in pts {
        let via = propagate(0.5, |xp, vp| g1(0.5, xp, vp), x, v, &q);
        assert!((via - g1(1.0, x, v)).abs() <= 1e-4, "({x}, {v}): {via} vs {}", g1(1.0, x, v));
    }
}

fn bump_source(center: PhasePoint, width: f64) -> GridFunction {
    let n = 24;
    let axes = [
        Axis::new(center.t - 0.1, center.t, 8).unwrap(),
        Axis::new(center.x[0] - width, center.x[0] + width, n).unwrap(),
        Axis::new(center.v[0] - width, center.v[0] + width, n).unwrap(),
    ];
    GridFunction::from_fn(axes, |t, x, v| {
        let s = ((x - center.x[0]) / width).powi(2) + ((v - center.v[0]) / width).powi(2);
        let dt = (t - center.t + 0.05) / 0.05;
        ((1.0 - s).max(0.0) * (1.0 - dt * dt).max(0.0)).powi(2)
    })
}

#[test]
fn convolution_of_zero_and_before_support() {
    let q = KernelQuadrature::default();
    let mut src = bump_source(PhasePoint::origin(), 0.3);
    let early = PhasePoint::new(-1.0, [0.0], [0.0]);
    assert_eq!(convolve_representation(&src, &[early], &q)[0], 0.0);
    src.data.iter_mut().for_each(|d| *d = 0.0);
    assert_eq!(convolve_representation(&src, &[PhasePoint::new(0.5, [0.0], [0.0])], &q)[0], 0.0);
}

#[test]
fn convolution_is_galilean_covariant() {
    let q = KernelQuadrature::default();
    let z0 = PhasePoint::new(0.3, [0.2], [0.5]);
    let src = bump_source(PhasePoint::origin(), 0.3);
    // The translated source, sampled on a box covering the sheared image.
    let shifted = |z: &PhasePoint| {
        let back = z0.inverse().compose(z);
        let i = src.interpolate(back.t, back.x[0], back.v[0]);
        let inside = src.axes.iter().zip([back.t, back.x[0], back.v[0]]).all(|(a, c)| c >= a.lo && c <= a.hi);
        if inside { i } else { 0.0 }
    };
    let big = [Axis::new(0.2, 0.3, 8).unwrap(), Axis::new(-0.3, 0.8, 96).unwrap(), Axis::new(0.2, 0.8, 24).unwrap()];
    let translated = GridFunction::from_fn(big, |t, x, v| shifted(&PhasePoint::new(t, [x], [v])));
    let eval: Vec<PhasePoint> = [(0.5, 0.1, 0.2), (0.8, -0.2, 0.0), (0.4, 0.05, -0.1)].iter().map(|&(t, x, v)| PhasePoint::new(t, [x], [v])).collect();
    let a = convolve_representation(&src, &eval, &q);
    let moved_eval: Vec<PhasePoint> = eval.iter().map(|z| z0.compose(z)).collect();
    let b = convolve_representation(&translated, &moved_eval, &q);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-2 * x.abs().max(1e-3), "{x} vs {y}");
    }
}
