use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qsdist_bench::{campaign_instance, sample_link};
use qsdist_core::decoherence::mc_avg_noise;
use qsdist_core::distill::distill_stats;
use qsdist_core::optimizer::{exhaustive_search, simulated_annealing};
use qsdist_core::{default_params, evaluate_link, AnnealConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn link(c: &mut Criterion) {
    let params = default_params();
    let (user, alloc) = sample_link();
    c.bench_function("evaluate_link", |b| b.iter(|| evaluate_link(&params, black_box(&user), black_box(&alloc))));
    c.bench_function("distill_stats_z7", |b| b.iter(|| distill_stats(black_box(0.93), 7)));
}

fn monte_carlo(c: &mut Criterion) {
    c.bench_function("mc_avg_noise_10k_z7", |b| {
        b.iter(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            mc_avg_noise(black_box(0.1), 7, 100.0, 10_000, &mut rng)
        })
    });
}

fn optimizers(c: &mut Criterion) {
    let instance = campaign_instance(3);
    let cfg = AnnealConfig::default();
    let mut group = c.benchmark_group("solve_fig2");
    group.sample_size(10);
    group.bench_function("anneal", |b| {
        b.iter(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            simulated_annealing(black_box(&instance), &cfg, &mut rng)
        })
    });
    group.bench_function("exhaustive_grid64", |b| b.iter(|| exhaustive_search(black_box(&instance), 64)));
    group.finish();
}

criterion_group!(benches, link, monte_carlo, optimizers);
criterion_main!(benches);
