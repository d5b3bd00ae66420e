use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use voromle_bench::{random_instance, reference_matrix};
use voromle_core::{gradient, objective, solve, unit_weights, SolverConfig};
use voromle_core::experiments::fixtures;

fn bench_objective_and_gradient(c: &mut Criterion) {
    let (p, w, r) = random_instance(8, 1);
    c.bench_function("objective_m8", |b| {
        b.iter(|| objective(black_box(&r), &p, &w, 0.01).unwrap())
    });
    c.bench_function("gradient_m8", |b| {
        b.iter(|| gradient(black_box(&r), &p, &w, 0.01).unwrap())
    });
}

fn bench_solve(c: &mut Criterion) {
    let p = reference_matrix();
    let w = unit_weights(&fixtures::three_type_population().unwrap().0);
    let config = SolverConfig::default();
    c.bench_function("solve_reference_instance", |b| {
        b.iter(|| solve(black_box(&p), &w, &config).unwrap())
    });

    let (p8, w8, _) = random_instance(8, 2);
    c.bench_function("solve_m8", |b| {
        b.iter(|| solve(black_box(&p8), &w8, &config).unwrap())
    });
}

criterion_group!(benches, bench_objective_and_gradient, bench_solve);
criterion_main!(benches);
