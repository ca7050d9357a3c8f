//! Parallel against sequential execution of the data-parallel loops.
//!
//! Without the `parallel` feature both policies run the sequential loop, so the
//! two series should coincide.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use iet_skew::cocycle::sample_cocycle;
use iet_skew::ergolab::fiber_histograms_merged;
use iet_skew::par::Exec;
use iet_skew::spectrum::{deviation_scan, log_grid};
use iet_skew::Iet;

const POLICIES: [(&str, Exec); 2] = [
    ("parallel", Exec::Parallel),
    ("sequential", Exec::Sequential),
];

fn deviation(c: &mut Criterion) {
    let iet = Iet::self_similar_reversal4().to_f64();
    let f = sample_cocycle::<f64>(7, 2, &1.0).expect("sampled cocycle");
    let grid = log_grid(100, 20_000, 4);
    let mut group = c.benchmark_group("deviation_scan");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::new(name, "16x2e4"), &exec, |b, &exec| {
            b.iter(|| deviation_scan(&iet, &f, &grid, 16, exec).expect("scan"))
        });
    }
    group.finish();
}

fn histograms(c: &mut Criterion) {
    let iet = Iet::golden_f64();
    let f = sample_cocycle::<f64>(3, 2, &1.0).expect("sampled cocycle");
    let starts = [0.1, 0.3, 0.5, 0.7, 0.2, 0.4, 0.6, 0.8];
    let mut group = c.benchmark_group("fiber_histograms_merged");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::new(name, "8x5e4"), &exec, |b, &exec| {
            b.iter(|| {
                fiber_histograms_merged(&iet, &f, &starts, 50_000, 1.0 / 64.0, 4.0, 128, exec)
                    .expect("histograms")
            })
        });
    }
    group.finish();
}

criterion_group!(benches, deviation, histograms);
criterion_main!(benches);
