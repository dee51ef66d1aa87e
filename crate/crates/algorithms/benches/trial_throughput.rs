//! Multi-trial throughput with and without the data-parallel pool. The two
//! entry points produce identical statistics; this suite measures what the
//! `parallel` feature buys on batchy workloads.

use algorithms::{run_trials, run_trials_serial, Algorithm, RunConfig};
use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DVector;
use operator_core::{AffineOperator, Matrix, Operator, OperatorEnsemble, Vector};
use std::hint::black_box;

/// Deterministic 20-member family in dimension 6: identity plus a member-
/// dependent skew pattern, so every member is 1-strongly monotone.
fn bench_ensemble() -> OperatorEnsemble {
    let d = 6;
    let members = (0..20)
        .map(|m| {
            let mut b = Matrix::identity(d, d);
            for i in 0..d {
                for j in 0..i {
                    let s = 0.05 * ((m * 7 + i * 3 + j) % 11) as f64 - 0.25;
                    b[(i, j)] += s;
                    b[(j, i)] -= s;
                }
            }
            let r = DVector::from_fn(d, |i, _| 0.3 * ((m + i) % 5) as f64 - 0.6);
            Operator::Affine(AffineOperator::new(b, r).unwrap())
        })
        .collect();
    OperatorEnsemble::new(members).unwrap()
}

fn bench_trials(c: &mut Criterion) {
    let ens = bench_ensemble();
    let mut config = RunConfig::new(0.1, 300, 7, Vector::from_element(6, 2.0));
    config.record_every = 10;
    let trials = 64;

    let mut group = c.benchmark_group("lsvrp_64_trials");
    group.bench_function("parallel", |b| {
        b.iter(|| {
            black_box(
                run_trials(Algorithm::Lsvrp { p: 0.1 }, &ens, &config, trials).unwrap(),
            )
        })
    });
    group.bench_function("serial", |b| {
        b.iter(|| {
            black_box(
                run_trials_serial(Algorithm::Lsvrp { p: 0.1 }, &ens, &config, trials).unwrap(),
            )
        })
    });
    group.finish();

    let mut group = c.benchmark_group("point_saga_64_trials");
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(run_trials(Algorithm::PointSaga, &ens, &config, trials).unwrap()))
    });
    group.bench_function("serial", |b| {
        b.iter(|| {
            black_box(run_trials_serial(Algorithm::PointSaga, &ens, &config, trials).unwrap())
        })
    });
    group.finish();
}

criterion_group!(benches, bench_trials);
criterion_main!(benches);
