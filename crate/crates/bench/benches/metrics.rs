use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qihsi_core::metrics::{hypervolume, igd, wilcoxon_rank_sum};
use qihsi_core::problems::{true_front_sample, BenchmarkId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn metrics(c: &mut Criterion) {
    let reference = true_front_sample(BenchmarkId::Zdt1, 1000).unwrap().points;
    let front = true_front_sample(BenchmarkId::Zdt1, 100).unwrap().points;
    c.bench_function("igd_100_vs_1000", |b| b.iter(|| black_box(igd(&front, &reference).unwrap())));
    c.bench_function("hv2d_100", |b| b.iter(|| black_box(hypervolume(&front, &[1.1, 1.1]).unwrap())));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let front3: Vec<Vec<f64>> = (0..100)
        .map(|_| {
            let a: f64 = rng.random();
            let b: f64 = rng.random::<f64>() * (1.0 - a);
            vec![a, b, 1.0 - a - b]
        })
        .collect();
    c.bench_function("hv3d_100", |b| b.iter(|| black_box(hypervolume(&front3, &[1.2, 1.2, 1.2]).unwrap())));

    let xs: Vec<f64> = (0..10).map(|_| rng.random()).collect();
    let ys: Vec<f64> = (0..10).map(|_| rng.random()).collect();
    c.bench_function("rank_sum_exact_10_10", |b| b.iter(|| black_box(wilcoxon_rank_sum(&xs, &ys).unwrap())));
}

criterion_group!(benches, metrics);
criterion_main!(benches);
