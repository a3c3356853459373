use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tensorrank::approx::{als_cp, weak_rank2, AlsOptions, WeakOptions};
use tensorrank::{classify222, delta, reduce222, EPS_DELTA};
use tensorrank_bench::{canonical_g3, exact_orbit_samples, float_orbit_samples};

fn hyperdeterminant(c: &mut Criterion) {
    let exact = exact_orbit_samples(1);
    let float = float_orbit_samples(1);
    c.bench_function("delta/exact", |b| {
        b.iter(|| exact.iter().map(|t| delta(black_box(t)).unwrap()).collect::<Vec<_>>())
    });
    c.bench_function("delta/f64", |b| {
        b.iter(|| float.iter().map(|t| delta(black_box(t)).unwrap()).sum::<f64>())
    });
}

fn classification(c: &mut Criterion) {
    let exact = exact_orbit_samples(2);
    let float = float_orbit_samples(2);
    c.bench_function("classify222/exact", |b| {
        b.iter(|| exact.iter().map(|t| classify222(black_box(t), EPS_DELTA).unwrap()).collect::<Vec<_>>())
    });
    c.bench_function("classify222/f64", |b| {
        b.iter(|| float.iter().map(|t| classify222(black_box(t), EPS_DELTA).unwrap()).collect::<Vec<_>>())
    });
    c.bench_function("reduce222/f64", |b| {
        b.iter(|| float.iter().filter_map(|t| reduce222(black_box(t), EPS_DELTA).ok()).count())
    });
}

fn fitting(c: &mut Criterion) {
    let g3 = canonical_g3();
    let opts = AlsOptions { rank: 2, seed: 0, max_iter: 100, tol: 0.0 };
    c.bench_function("als_cp/g3_rank2_100_sweeps", |b| b.iter(|| als_cp(black_box(&g3), &opts).unwrap()));
    let weak = WeakOptions { restarts: 2, max_iter: 200, ..WeakOptions::default() };
    let mut group = c.benchmark_group("weak_rank2");
    group.sample_size(10);
    group.bench_function("g3", |b| b.iter(|| weak_rank2(black_box(&g3), &weak).unwrap()));
    group.finish();
}

criterion_group!(benches, hyperdeterminant, classification, fitting);
criterion_main!(benches);
