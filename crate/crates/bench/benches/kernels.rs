use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use finphase_core::exactpoly::{random_homogeneous, random_polynomial};
use finphase_core::oscillatory::oscillatory_samples;
use finphase_core::sections::section_volume;
use finphase_core::stphase::{delta_vanishing_check, quad_phase_expand};
use finphase_core::surfaces::make_quadric;
use finphase_core::{CutoffSpec, OscOptions, QuadricKind, QuadricSpec};

fn sections(c: &mut Criterion) {
    let s = make_quadric(&QuadricSpec { kind: QuadricKind::Ellipsoid, a: vec![1.0, 1.0, 1.0] }, 3, 12).unwrap();
    let frame = s.inverse_gauss(&[0.1, -0.05, (1.0f64 - 0.0125).sqrt()]).unwrap();
    c.bench_function("section_volume sphere t=0.2", |b| b.iter(|| section_volume(&s, &frame, black_box(0.2)).unwrap()));
}

fn oscillatory(c: &mut Criterion) {
    let s = make_quadric(&QuadricSpec { kind: QuadricKind::EllipticParaboloid, a: vec![1.0, 1.0] }, 3, 12).unwrap();
    let frame = s.inverse_gauss(&[0.0, 0.0, 1.0]).unwrap();
    let cut = CutoffSpec::new(4.5, 1.0 / 3.0).unwrap();
    let mut group = c.benchmark_group("oscillatory");
    group.sample_size(10);
    group.bench_function("paraboloid lambda 10,40,160", |b| {
        b.iter(|| oscillatory_samples(&s, &frame, &cut, black_box(&[10.0, 40.0, 160.0]), &[0], &OscOptions::default()).unwrap())
    });
    group.finish();
}

fn exact(c: &mut Criterion) {
    let h = random_homogeneous(3, 7, 4, 5);
    c.bench_function("delta check m=7 alpha=2 d=3", |b| b.iter(|| delta_vanishing_check(black_box(&h), 7, 2, None).unwrap()));
    let p = random_polynomial(2, 6, 6, 9);
    c.bench_function("quad_phase_expand degree 6", |b| b.iter(|| quad_phase_expand(black_box(&p), 6)));
}

criterion_group!(benches, sections, oscillatory, exact);
criterion_main!(benches);
