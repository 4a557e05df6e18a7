//! Benchmarks for the quadratic-form pipeline: assembly, the shifted solve
//! behind every resolvent, and the inertia-based kernel count.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use walsh_core::forms::{assemble, FormKind};
use walsh_core::{AngularMeasure, DiscreteFunction, Grid, OriginMode};

fn form_pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("forms");

    let grid = Grid::new(4, 2000, 5e-4).unwrap();
    let measure = AngularMeasure::uniform(4).unwrap();

    group.bench_function("assemble_walsh_4x2000", |b| {
        b.iter(|| assemble(FormKind::Walsh, black_box(&grid), &measure).unwrap())
    });

    let walsh = assemble(FormKind::Walsh, &grid, &measure).unwrap();
    let g = DiscreteFunction::from_fn(&grid, OriginMode::Shared, |_, r| (-r).exp()).unwrap();
    group.bench_function("resolvent_4x2000", |b| {
        b.iter(|| walsh.resolvent(black_box(1.0), &g).unwrap())
    });

    let reflecting = assemble(FormKind::Reflecting, &grid, &measure).unwrap();
    group.bench_function("kernel_dimension_4x2000", |b| {
        b.iter(|| black_box(&reflecting).kernel_dimension())
    });

    group.finish();
}

criterion_group!(benches, form_pipeline);
criterion_main!(benches);
