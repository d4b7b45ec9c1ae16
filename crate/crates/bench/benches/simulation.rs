use std::hint::black_box;

use burkelab_core::queuesim::{simulate_queue, simulate_tandem};
use burkelab_core::sampler::derive_stream;
use criterion::{criterion_group, criterion_main, Criterion};

fn queues(c: &mut Criterion) {
    c.bench_function("mm1_window_1000", |b| {
        let mut rng = derive_stream(1, 0).rng();
        b.iter(|| simulate_queue(black_box(0.5), 1.0, (0.0, 1000.0), &mut rng).unwrap())
    });
    c.bench_function("tandem3_window_1000", |b| {
        let mut rng = derive_stream(2, 0).rng();
        b.iter(|| simulate_tandem(black_box(0.5), &[1.0, 1.5, 2.0], (0.0, 1000.0), &mut rng).unwrap())
    });
}

criterion_group!(benches, queues);
criterion_main!(benches);
