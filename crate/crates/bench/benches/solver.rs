use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use disclosure_core::{
    report_stats, simulate, solve_baseline, solve_extension, ExtParams, ModelParams, SimConfig,
    SimModel, XDist, DEFAULT_TOL,
};

fn baseline(r: f64) -> ModelParams {
    ModelParams::new(0.5, 0.5, 0.8, r, 1.0, XDist::normal(1.0, 0.5).unwrap()).unwrap()
}

fn bench_baseline(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_baseline");
    for r in [0.5, 2.0] {
        let p = baseline(r);
        g.bench_with_input(BenchmarkId::from_parameter(r), &p, |b, p| {
            b.iter(|| {
                let eq = solve_baseline(black_box(p), DEFAULT_TOL).unwrap();
                report_stats(p, &eq)
            })
        });
    }
    g.finish();
}

fn bench_extension(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_extension");
    for r in [0.5, 3.0] {
        let e = ExtParams::new(1.0, 0.7, r, 1.0, XDist::normal(1.0, 0.5).unwrap(), 0.5).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(r), &e, |b, e| {
            b.iter(|| solve_extension(black_box(e), DEFAULT_TOL).unwrap())
        });
    }
    g.finish();
}

fn bench_simulate(c: &mut Criterion) {
    let cfg = SimConfig::new(SimModel::Baseline(baseline(0.5)), 100_000, 1).unwrap();
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    g.bench_function("baseline_1e5_paths", |b| {
        b.iter(|| simulate(black_box(&cfg)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_baseline, bench_extension, bench_simulate);
criterion_main!(benches);
