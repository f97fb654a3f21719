use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use relbundle_core::evolution::{EvolutionProblem, Scheme};
use relbundle_core::green::{eigenbasis, retarded_green_dirac};
use relbundle_core::reduction::{dirac_hamiltonian, HamiltonianFactory, PhysicalParams, Potentials, ScalarField};
use relbundle_core::{GridFunction, SpatialGrid1D, C64};

fn packet(grid: &SpatialGrid1D, m: usize) -> GridFunction {
    let c = grid.length() / 2.0;
    GridFunction::from_fn(grid, m, |a, x| C64::new(-(x - c).powi(2), x + a as f64).exp())
}

fn derivative(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_derivative");
    for n in [64, 256, 1024] {
        let grid = SpatialGrid1D::periodic(n, 2.0 * PI).unwrap();
        let psi = packet(&grid, 4);
        group.bench_with_input(BenchmarkId::from_parameter(n), &psi, |b, psi| b.iter(|| black_box(psi.derivative(2).unwrap())));
    }
    group.finish();
}

fn dirac_setup(n: usize) -> (HamiltonianFactory, SpatialGrid1D) {
    let grid = SpatialGrid1D::periodic(n, 20.0).unwrap();
    let pot = Potentials::new(ScalarField::from_static(|x| 0.3 * x.cos()), ScalarField::Zero);
    (dirac_hamiltonian(&PhysicalParams::default(), &pot).unwrap(), grid)
}

fn dirac_problem(n: usize) -> EvolutionProblem {
    let (h, grid) = dirac_setup(n);
    EvolutionProblem::new(h, grid, 0.0, 1.0, 0.01, Scheme::CrankNicolson).unwrap()
}

fn crank_nicolson_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("dirac_cn_step");
    group.sample_size(20);
    for n in [16, 64] {
        let p = dirac_problem(n);
        let psi = packet(p.grid(), 4);
        group.bench_with_input(BenchmarkId::from_parameter(n), &psi, |b, psi| b.iter(|| black_box(p.step(psi, 0.0).unwrap())));
    }
    group.finish();
}

fn kernel_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("dirac_green_kernel");
    group.sample_size(10);
    for n in [16, 32] {
        let (h, grid) = dirac_setup(n);
        let basis = eigenbasis(&h, &grid).unwrap();
        group.bench_function(BenchmarkId::new("eigenbasis", n), |b| b.iter(|| black_box(eigenbasis(&h, &grid).unwrap())));
        group.bench_with_input(BenchmarkId::new("assemble", n), &basis, |b, basis| {
            b.iter(|| black_box(retarded_green_dirac(basis, 1.0, 0.0).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, derivative, crank_nicolson_step, kernel_assembly);
criterion_main!(benches);
