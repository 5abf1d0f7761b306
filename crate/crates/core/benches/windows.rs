use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hupa_core::exec::with_threads;
use hupa_core::field::BinaryField;
use hupa_core::generators::generate_poisson;
use hupa_core::variance::{fraction_variance_curve, number_variance_curve};
use hupa_core::{BoxDomain, Seed};

const RADII: [f64; 4] = [2.0, 4.0, 8.0, 12.0];

fn pools() -> [(&'static str, Option<usize>); 2] {
    [("sequential", Some(1)), ("pool", None)]
}

fn number_curve(c: &mut Criterion) {
    let p = generate_poisson(BoxDomain::square(64.0).unwrap(), 1.0, Seed(1)).unwrap();
    let mut group = c.benchmark_group("number_variance_curve");
    group.sample_size(20);
    for (name, threads) in pools() {
        group.bench_with_input(BenchmarkId::new(name, 20_000), &threads, |b, &threads| {
            b.iter(|| with_threads(threads, || number_variance_curve(&p, &RADII, 20_000, Seed(2)).unwrap()))
        });
    }
    group.finish();
}

fn fraction_curve(c: &mut Criterion) {
    let f = BinaryField::from_fn(512, 512, 0.125, |x, y| (x * 7 + y * 13) % 5 < 2).unwrap();
    let mut group = c.benchmark_group("fraction_variance_curve");
    group.sample_size(20);
    for (name, threads) in pools() {
        group.bench_with_input(BenchmarkId::new(name, 10_000), &threads, |b, &threads| {
            b.iter(|| with_threads(threads, || fraction_variance_curve(&f, &RADII, 10_000, Seed(3)).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, number_curve, fraction_curve);
criterion_main!(benches);
