use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use kirchhoff_bench::fixture;
use kirchhoff_core::{compute_moments, integrate, rhs, StepControl};

const SIZES: [(usize, u32); 3] = [(1, 3), (1, 64), (2, 16)];

fn bench_rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for (dim, max_index) in SIZES {
        let (lat, p, s) = fixture(dim, max_index);
        group.bench_with_input(BenchmarkId::from_parameter(lat.len()), &s, |b, s| {
            b.iter(|| rhs(black_box(s), &lat, &p).unwrap())
        });
    }
    group.finish();
}

fn bench_moments(c: &mut Criterion) {
    let mut group = c.benchmark_group("compute_moments");
    for (dim, max_index) in SIZES {
        let (lat, p, s) = fixture(dim, max_index);
        group.bench_with_input(BenchmarkId::from_parameter(lat.len()), &s, |b, s| {
            b.iter(|| compute_moments(black_box(s), &lat, &p).unwrap())
        });
    }
    group.finish();
}

fn bench_integrate(c: &mut Criterion) {
    let mut group = c.benchmark_group("integrate_t1");
    group.sample_size(20);
    let (lat, p, s) = fixture(1, 64);
    for control in [
        StepControl::rk4(1e-3),
        StepControl::verlet(1e-3),
        StepControl::adaptive(1e-10, 1e-12),
    ] {
        group.bench_function(control.method.name(), |b| {
            b.iter(|| integrate(black_box(&s), &lat, &p, &control, 1.0, 0.1).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_rhs, bench_moments, bench_integrate);
criterion_main!(benches);
