use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hypokin::estimates::calibration::Calibration;
use hypokin::estimates::field::Setting;
use hypokin::estimates::norms::{gagliardo_x_seminorm, lp_norm};
use hypokin::geometry::vitali_inclusion_check;
use hypokin::kernel::{g1, kernel_mass, KernelQuadrature};
use hypokin::solver::scheme::solve;
use hypokin::solver::weak::weak_subsolution_residual;
use hypokin::suite::{ensemble_datum, measure_member};
use hypokin::{paper_constants, CylinderKind, KineticCylinder, PhasePoint};
use hypokin_bench::coarse_ensemble;

fn kernel(c: &mut Criterion) {
    c.bench_function("g1 on 10^4 points", |b| {
        b.iter(|| {
            let mut s = 0.0;
            for i in 0..10_000 {
                let u = i as f64 * 1e-4;
                s += g1(0.1 + u, u - 0.5, 0.5 - u);
            }
            black_box(s)
        })
    });
    let q = KernelQuadrature::default();
    c.bench_function("kernel_mass t=1", |b| b.iter(|| kernel_mass(black_box(1.0), 1, &q, 1e-7).unwrap()));
}

fn geometry(c: &mut Criterion) {
    let z = PhasePoint::new(-0.2, [0.1], [0.3]);
    let c1 = KineticCylinder::new(CylinderKind::Covering, z, 0.3).unwrap();
    let c2 = KineticCylinder::new(CylinderKind::Covering, z.compose(&PhasePoint::new(0.05, [0.02], [-0.1])), 0.4).unwrap();
    c.bench_function("vitali_inclusion_check", |b| b.iter(|| vitali_inclusion_check(black_box(&c1), &c2).unwrap()));
    c.bench_function("paper_constants", |b| b.iter(|| paper_constants(1, black_box(0.5), 0.5, 0.25, 0.25, 10.0).unwrap()));
}

fn solver_and_checks(c: &mut Criterion) {
    let spec = coarse_ensemble(2);
    let coef = spec.coefficients(1).unwrap();
    let mut g = c.benchmark_group("ensemble 80x128x80");
    g.sample_size(10);
    g.bench_function("solve", |b| b.iter(|| solve(&ensemble_datum, &coef, &spec.grid).unwrap()));
    let f = solve(&ensemble_datum, &coef, &spec.grid).unwrap();
    let basis = spec.basis().unwrap();
    g.bench_function("weak residual", |b| b.iter(|| weak_subsolution_residual(&f, &coef, &basis).unwrap()));
    let set = Setting::new(&f).with_coefficients(&coef);
    let q = KineticCylinder::centered(PhasePoint::origin(), 0.5).unwrap();
    g.bench_function("L2 norm on Q_1/2", |b| b.iter(|| lp_norm(&set, &q, 2.0).unwrap()));
    g.bench_function("gagliardo on Q_1/2", |b| b.iter(|| gagliardo_x_seminorm(&set, &q, 0.25).unwrap()));
    let calib = Calibration::pinned();
    g.bench_function("all member checks", |b| b.iter(|| measure_member(&f, &coef, &spec, 1, &calib).unwrap()));
    g.finish();
}

criterion_group!(benches, kernel, geometry, solver_and_checks);
criterion_main!(benches);
