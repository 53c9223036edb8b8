use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use kinbound::envelope::solve_envelope;
use kinbound::models::{KineticModel, PotentialModel};
use kinbound::oracle::{self, Backend, OracleConfig};
use kinbound::special::lambert_w0;
use kinbound_bench::toy_problem;

fn lambert(c: &mut Criterion) {
    c.bench_function("lambert_w0", |b| {
        b.iter(|| {
            let mut s = 0.0;
            for i in 1..=100 {
                s += lambert_w0(black_box(i as f64 * 0.37)).unwrap();
            }
            s
        })
    });
}

fn envelope_toy(c: &mut Criterion) {
    let (t, v, aux, state) = toy_problem(1.0, 0, 0);
    c.bench_function("envelope_toy_k1", |b| {
        b.iter(|| solve_envelope(&t, &v, &aux, black_box(state)).unwrap().energy)
    });
}

fn grid_oracle(c: &mut Criterion) {
    let (t, v, _, _) = toy_problem(1.0, 0, 0);
    let cfg = OracleConfig {
        backend: Backend::MomentumGrid,
        size: Some(1000),
        states: 1,
        ..OracleConfig::default()
    };
    c.bench_function("momentum_grid_toy_1000", |b| {
        b.iter(|| oracle::solve(&t, &v, 0, black_box(&cfg)).unwrap().ground())
    });
}

fn basis_oracle(c: &mut Criterion) {
    let t = KineticModel::ultrarelativistic(1.0).unwrap();
    let v = PotentialModel::linear(1.0).unwrap();
    let cfg = OracleConfig {
        backend: Backend::OscillatorBasis,
        size: Some(24),
        states: 1,
        ..OracleConfig::default()
    };
    let mut group = c.benchmark_group("basis");
    group.sample_size(10);
    group.bench_function("oscillator_basis_p_r_24", |b| {
        b.iter(|| oracle::solve(&t, &v, 0, black_box(&cfg)).unwrap().ground())
    });
    group.finish();
}

criterion_group!(benches, lambert, envelope_toy, grid_oracle, basis_oracle);
criterion_main!(benches);
