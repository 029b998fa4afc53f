use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use muskat_core::certify::{lattice_samples, rat_coeffs, verify_det_lower_bound, Cell, RatParams};
use muskat_core::liapunov::build_coeffs_recursive;
use muskat_core::stepper::{frozen_system_assemble, solve_block_tridiagonal};
use muskat_core::{ic, picard_step, Grid, InitialCondition, PhysParams, StepConfig};
use std::hint::black_box;

fn coefficients(c: &mut Criterion) {
    let p = PhysParams::new(0.1, 10.0).unwrap();
    let rp = RatParams::parse("1/10", "10").unwrap();
    c.bench_function("float_coeffs_n64", |b| {
        b.iter(|| build_coeffs_recursive(black_box(64), &p).unwrap())
    });
    c.bench_function("rational_coeffs_n32", |b| {
        b.iter(|| rat_coeffs(black_box(32), &rp).unwrap())
    });
}

fn certification(c: &mut Criterion) {
    let rp = RatParams::parse("1/10", "10").unwrap();
    let samples = lattice_samples(50, 0);
    let mut group = c.benchmark_group("certify");
    for n in [4usize, 8, 12] {
        group.bench_with_input(BenchmarkId::new("expand_sn", n), &n, |b, &n| {
            let cell = Cell::new(n, &rp).unwrap();
            b.iter(|| cell.expand_sn())
        });
    }
    group.bench_function("det_bound_n8_50_samples", |b| {
        b.iter(|| verify_det_lower_bound(8, &rp, &samples).unwrap())
    });
    group.finish();
}

fn stepping(c: &mut Criterion) {
    let p = PhysParams::new(1.0, 2.0).unwrap();
    let spec = InitialCondition::Bump {
        center: 0.5,
        width: 0.3,
        height_f: 1.0,
        height_g: 0.5,
    };
    let mut group = c.benchmark_group("step");
    for m in [201usize, 1001] {
        let grid = Grid::new(0.0, 1.0, m).unwrap();
        let state = ic::build_initial_condition(&spec, &grid).unwrap();
        let cfg = StepConfig::new(1e-3);
        group.bench_with_input(BenchmarkId::new("linear_solve", m), &m, |b, _| {
            let sys = frozen_system_assemble(&grid, &p, &cfg, &state, &state).unwrap();
            b.iter(|| solve_block_tridiagonal(black_box(&sys)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("picard_step", m), &m, |b, _| {
            b.iter(|| picard_step(black_box(&state), &grid, &p, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, coefficients, certification, stepping);
criterion_main!(benches);
