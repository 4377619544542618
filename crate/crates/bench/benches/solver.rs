use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polyharm_bench::unit_ball;
use polyharm_core::pohozaev::{green_boundary_functionals, pohozaev_stack};
use polyharm_core::solver::{newton_solve, trace_branch, ContinuationLimits, NewtonOptions};
use polyharm_core::{Dimension, RadialField, RadialGrid, RadialMap};

fn grid_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid_build");
    for nodes in [32, 64, 128] {
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &nodes, |b, &n| {
            let dim = Dimension::new(2).unwrap();
            b.iter(|| RadialGrid::new(dim, black_box(n), 1.0, RadialMap::Sinh { stretch: 6.0 }).unwrap())
        });
    }
    group.finish();
}

fn newton(c: &mut Criterion) {
    let mut group = c.benchmark_group("newton_lower_branch");
    for m in [1, 2] {
        let spec = unit_ball(m, 64, 8.0);
        let zero = RadialField::constant(&spec.grid, 0.0);
        let lambda = 0.1 * spec.lambda_scale();
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| newton_solve(&zero, black_box(lambda), &spec, NewtonOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn trace(c: &mut Criterion) {
    let spec = unit_ball(1, 64, 6.0);
    let mut group = c.benchmark_group("trace");
    group.sample_size(10);
    group.bench_function("m1_to_u6", |b| {
        b.iter(|| trace_branch(&spec, black_box(6.0), 0.5, ContinuationLimits::default()).unwrap())
    });
    group.finish();
}

fn identities(c: &mut Criterion) {
    let spec = unit_ball(2, 96, 8.0);
    let branch = trace_branch(&spec, 8.0, 0.5, ContinuationLimits::default()).unwrap();
    let state = branch.last().unwrap();
    c.bench_function("pohozaev_m2", |b| b.iter(|| pohozaev_stack(&state.stack, state.lambda, black_box(0.5)).unwrap()));
    let dim = Dimension::new(3).unwrap();
    c.bench_function("green_functionals_m3", |b| b.iter(|| green_boundary_functionals(dim, black_box(0.3)).unwrap()));
}

criterion_group!(benches, grid_build, newton, trace, identities);
criterion_main!(benches);
