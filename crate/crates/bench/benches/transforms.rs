use std::hint::black_box;

use burkelab_core::pathcore::{gamma_n, Path, PathBundle};
use burkelab_core::sampler::{derive_stream, poisson_times, sample_brownian_grid, sample_gue};
use burkelab_core::spectra::eigenvalues;
use burkelab_core::{GridPath, StepPath};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn grids(n: usize, steps: usize) -> Vec<GridPath> {
    let mut rng = derive_stream(1, 0).rng();
    (0..n).map(|_| sample_brownian_grid(0.0, 1.0 / steps as f64, steps, &mut rng).unwrap()).collect()
}

fn convolutions(c: &mut Criterion) {
    let g = grids(2, 10_000);
    c.bench_function("grid_inf_conv_10k", |b| b.iter(|| black_box(&g[0]).inf_conv(black_box(&g[1])).unwrap()));
    c.bench_function("grid_sup_conv_10k", |b| b.iter(|| black_box(&g[0]).sup_conv(black_box(&g[1])).unwrap()));

    let mut rng = derive_stream(2, 0).rng();
    let f = StepPath::counting(0.0, 1000.0, poisson_times(0.5, (0.0, 1000.0), &mut rng).unwrap()).unwrap();
    let s = StepPath::counting(0.0, 1000.0, poisson_times(1.0, (0.0, 1000.0), &mut rng).unwrap()).unwrap();
    c.bench_function("step_inf_conv_1500_jumps", |b| b.iter(|| black_box(&f).inf_conv(black_box(&s)).unwrap()));
}

fn gamma(c: &mut Criterion) {
    let mut group = c.benchmark_group("gamma_n_grid_1000");
    for n in [2, 4, 8] {
        let bundle = PathBundle::new(grids(n, 1000)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &bundle, |b, bundle| b.iter(|| gamma_n(black_box(bundle)).unwrap()));
    }
    group.finish();
}

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("hermitian_eigenvalues");
    for n in [8, 32, 64] {
        let h = sample_gue(n, &mut derive_stream(3, n as u64).rng()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| b.iter(|| eigenvalues(black_box(h)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, convolutions, gamma, eigensolver);
criterion_main!(benches);
