//! Sequential vs rayon backends on the three data-parallel workloads.
//!
//! `cargo bench -p ar1-persistence` (the `parallel` feature must be on for
//! the rayon side).

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ar1_persistence::mc::{simulate_with, SimConfig};
use ar1_persistence::series::expand_with;
use ar1_persistence::spectral::{
    build_rule, discretize_with, perron_eigenpair, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use ar1_persistence::Backend;

fn backends() -> Vec<Backend> {
    #[cfg(feature = "parallel")]
    return vec![Backend::Sequential, Backend::Parallel];
    #[cfg(not(feature = "parallel"))]
    vec![Backend::Sequential]
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    let config = SimConfig {
        rho: 0.5,
        n_max: 30,
        paths: 1_000_000,
        seed: 1,
        batches: 100,
    };
    for backend in backends() {
        group.bench_with_input(
            BenchmarkId::from_parameter(backend.name()),
            &backend,
            |b, &backend| b.iter(|| simulate_with(black_box(&config), backend).unwrap()),
        );
    }
    group.finish();
}

fn nystrom(c: &mut Criterion) {
    let mut group = c.benchmark_group("nystrom_perron");
    for npp in [16, 64] {
        let rule = build_rule(npp, 8, 10.0).unwrap();
        for backend in backends() {
            let id = BenchmarkId::new(backend.name(), rule.len());
            group.bench_with_input(id, &backend, |b, &backend| {
                b.iter(|| {
                    let op = discretize_with(black_box(0.5), &rule, backend).unwrap();
                    perron_eigenpair(&op, DEFAULT_TOL, DEFAULT_MAX_ITER)
                        .unwrap()
                        .lambda
                })
            });
        }
    }
    group.finish();
}

fn series(c: &mut Criterion) {
    let mut group = c.benchmark_group("expand");
    group.sample_size(10);
    for backend in backends() {
        group.bench_with_input(
            BenchmarkId::new(backend.name(), 40),
            &backend,
            |b, &backend| b.iter(|| expand_with(black_box(40), backend)),
        );
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, nystrom, series);
criterion_main!(benches);
