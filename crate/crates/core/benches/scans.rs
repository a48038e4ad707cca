use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use carousel_core::par::Execution;
use carousel_core::period::{audit_scan, energy_grid, period_scan};
use carousel_core::scalar::{H_BOUNDARY, H_MAX};
use carousel_core::tracer::closure_scan;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn period_scans(c: &mut Criterion) {
    let grid = energy_grid(H_BOUNDARY + 1e-3, H_MAX - 1e-3, 200);
    let mut group = c.benchmark_group("period_scan");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| period_scan(&grid, 201, exec).unwrap())
        });
    }
    group.finish();
}

fn audit_scans(c: &mut Criterion) {
    let grid = energy_grid(H_BOUNDARY + 1e-6, H_MAX - 1e-6, 50);
    let mut group = c.benchmark_group("audit_scan");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| audit_scan(&grid, 1001, exec).unwrap())
        });
    }
    group.finish();
}

fn closure_scans(c: &mut Criterion) {
    let grid = energy_grid(H_BOUNDARY + 0.01, H_MAX - 0.01, 16);
    let mut group = c.benchmark_group("closure_scan");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| closure_scan(&grid, 1e-3, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, period_scans, audit_scans, closure_scans);
criterion_main!(benches);
