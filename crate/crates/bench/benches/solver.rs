use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mcm_bench::gaussian_blobs;
use mcm_core::formulation::fit;
use mcm_core::{KernelSpec, TrainConfig};

fn linear(c: &mut Criterion) {
    let mut group = c.benchmark_group("soft_linear");
    for m in [50, 100, 200] {
        let (x, y) = gaussian_blobs(m, 5, 1.0, 7);
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| fit(&x, &y, &TrainConfig::soft_linear(1.0)).unwrap())
        });
    }
    group.finish();
}

fn kernel(c: &mut Criterion) {
    let mut group = c.benchmark_group("soft_kernel_rbf");
    group.sample_size(10);
    for m in [50, 100, 200] {
        let (x, y) = gaussian_blobs(m, 2, 1.0, 7);
        let cfg = TrainConfig::soft_kernel(1.0, KernelSpec::rbf(0.5));
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| fit(&x, &y, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, linear, kernel);
criterion_main!(benches);
