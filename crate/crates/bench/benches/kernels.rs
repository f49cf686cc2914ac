use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use zollspec::models::{Deriv, Spectrum};
use zollspec::projector::remainder_scan;
use zollspec::smoothing::poisson_check;
use zollspec::specfun::{bessel_j, gegenbauer_norm};

fn bessel(c: &mut Criterion) {
    let mut g = c.benchmark_group("bessel_j");
    for (label, t) in [("series", 5.0), ("recurrence", 80.0), ("asymptotic", 900.0)] {
        g.bench_function(label, |b| {
            b.iter(|| bessel_j(black_box(0.5), black_box(t)).unwrap())
        });
    }
    g.finish();
}

fn gegenbauer(c: &mut Criterion) {
    c.bench_function("gegenbauer_norm l=200", |b| {
        b.iter(|| gegenbauer_norm(black_box(200), 3, black_box(0.37), 1).unwrap())
    });
}

fn scan(c: &mut Criterion) {
    let s = Spectrum::sphere(2, 210).unwrap();
    let mut g = c.benchmark_group("remainder_scan");
    g.sample_size(10);
    g.bench_function("s2 l=200", |b| {
        b.iter(|| {
            remainder_scan(
                &s,
                0.5,
                &[200],
                &[0.4, 0.2, 0.1, 0.05],
                &[Deriv::NONE, Deriv::new(1, 0)],
                256,
            )
            .unwrap()
        })
    });
    g.finish();
}

fn poisson(c: &mut Criterion) {
    let t = 2.0 * std::f64::consts::PI;
    c.bench_function("poisson_check sigma=0.05", |b| {
        b.iter(|| poisson_check(t, black_box(0.9), 0.05, 8).unwrap())
    });
}

criterion_group!(benches, bessel, gegenbauer, scan, poisson);
criterion_main!(benches);
