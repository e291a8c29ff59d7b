//! Rayon pool against the single-thread baseline for the data-parallel paths.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cbs_core::hbs::build_matrix;
use cbs_core::marginals::{all_modes, quantum_marginal, Model};
use cbs_core::oracle::{brute_marginal_table, OracleLimits};
use cbs_core::par;
use cbs_core::ModeColumn;

fn all_modes_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("all_modes_exact");
    group.sample_size(10);
    for (t, r) in [(10usize, 20usize), (20, 40)] {
        let grid = build_matrix(t, r).unwrap().mod_squared_grid();
        let id = format!("T{t}_R{r}");
        group.bench_with_input(BenchmarkId::new("rayon", &id), &grid, |b, g| {
            b.iter(|| all_modes(g, Model::Quantum).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", &id), &grid, |b, g| {
            b.iter(|| par::sequential(|| all_modes(g, Model::Quantum).unwrap()))
        });
    }
    group.finish();
}

fn oracle_blocks(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_table");
    group.sample_size(10);
    let v = build_matrix(3, 4).unwrap().exact().clone();
    let limits = OracleLimits::default();
    group.bench_function("rayon", |b| b.iter(|| brute_marginal_table(&v, &limits).unwrap()));
    group.bench_function("sequential", |b| {
        b.iter(|| par::sequential(|| brute_marginal_table(&v, &limits).unwrap()))
    });
    group.finish();
}

fn float_series(c: &mut Criterion) {
    let mut group = c.benchmark_group("float_series_4096");
    let col = ModeColumn::from_probs(vec![0.5 / 4096.0; 4096]).unwrap();
    group.bench_function("rayon", |b| b.iter(|| quantum_marginal(&col)));
    group.bench_function("sequential", |b| b.iter(|| par::sequential(|| quantum_marginal(&col))));
    group.finish();
}

criterion_group!(benches, all_modes_exact, oracle_blocks, float_series);
criterion_main!(benches);
