//! Hot-path benchmarks for the samplers: the single-step kernels that
//! dominate every experiment, and the two first-passage chains.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use walsh_core::montecarlo::{
    barrier_exit_chain, path_stream, reflected_step, wbm_exit_chain, SimConfig, SnowbStepper,
    WalkerState,
};
use walsh_core::{AngularMeasure, BarrierProfile, StarPoint};

fn step_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("steps");

    let mut rng = path_stream(7, 0);
    group.bench_function("reflected_step", |b| {
        b.iter(|| reflected_step(black_box(0.3), black_box(1e-3), &mut rng))
    });

    let measure = AngularMeasure::uniform(4).unwrap();
    let stepper = SnowbStepper::new(&measure, 2.0, 1e-3).unwrap();
    let mut rng = path_stream(7, 1);
    let mut state = WalkerState {
        point: StarPoint::new(0, 0.0).unwrap(),
        clock: 0.0,
        local_time: 0.0,
        kill_threshold: stepper.fresh_budget(&mut rng),
    };
    let mut rebirths = Vec::new();
    group.bench_function("snowb_step", |b| {
        b.iter(|| {
            let occupation = stepper.step(&mut state, &mut rng, &mut rebirths);
            rebirths.clear();
            occupation
        })
    });

    group.finish();
}

fn exit_chains(c: &mut Criterion) {
    let mut group = c.benchmark_group("exit_chains");
    group.sample_size(20);

    let measure = AngularMeasure::uniform(4).unwrap();
    let start = StarPoint::new(0, 0.3).unwrap();
    let sim = SimConfig {
        dt: 1e-3,
        horizon: 1.0,
        n_paths: 256,
        seed: 7,
        kappa: None,
        outer_radius: None,
    };
    group.bench_function("wbm_exit_chain_256", |b| {
        b.iter(|| wbm_exit_chain(black_box(start), 1.0, &measure, &sim).unwrap())
    });

    let profile = BarrierProfile::uniform(0.05, 0.1).unwrap();
    let lattice_start = StarPoint::new(0, 0.1).unwrap();
    let lattice_sim = SimConfig {
        dt: 1e-6,
        horizon: 1.0,
        n_paths: 64,
        seed: 7,
        kappa: None,
        outer_radius: None,
    };
    group.bench_function("barrier_exit_chain_64", |b| {
        b.iter(|| {
            barrier_exit_chain(
                &profile,
                1e-3,
                black_box(lattice_start),
                0.2,
                &measure,
                &lattice_sim,
            )
            .unwrap()
        })
    });

    group.finish();
}

criterion_group!(benches, step_kernels, exit_chains);
criterion_main!(benches);
