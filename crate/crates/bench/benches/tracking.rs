use std::hint::black_box;

use condtrack::cmetric::{condition_length, to_discrete_path};
use condtrack::{mu_norm, newton_step, track, TrackerConfig};
use condtrack_bench::{Workload, SHAPES};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernels");
    for (n, d) in SHAPES {
        let w = Workload::new(n, d, 1);
        let id = format!("n{n}_d{d}");
        group.bench_with_input(BenchmarkId::new("mu_norm", &id), &w, |b, w| {
            b.iter(|| mu_norm(black_box(&w.target), black_box(&w.zero)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("newton_step", &id), &w, |b, w| {
            b.iter(|| newton_step(black_box(&w.target), black_box(&w.zero)).unwrap())
        });
    }
    group.finish();
}

fn tracking(c: &mut Criterion) {
    let cfg = TrackerConfig::default();
    let mut group = c.benchmark_group("track");
    group.sample_size(10);
    for (n, d) in SHAPES {
        let w = Workload::new(n, d, 1);
        group.bench_with_input(BenchmarkId::from_parameter(format!("n{n}_d{d}")), &w, |b, w| {
            b.iter(|| track(&w.homotopy, &w.start, &cfg).unwrap())
        });
    }
    group.finish();

    let w = Workload::new(2, 2, 1);
    let res = track(&w.homotopy, &w.start, &cfg).unwrap();
    let path = to_discrete_path(&res, &w.homotopy, &cfg).unwrap();
    c.bench_function("condition_length", |b| b.iter(|| condition_length(black_box(&path)).unwrap()));
}

criterion_group!(benches, kernels, tracking);
criterion_main!(benches);
