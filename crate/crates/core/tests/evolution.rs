use std::f64::consts::PI;

use relbundle_core::algebra::{GridOperator, MatrixOperator};
use relbundle_core::evolution::{expectation, EvolutionProblem, Observable, Scheme};
use relbundle_core::reduction::*;
use relbundle_core::{GridFunction, SpatialGrid1D, C64};

fn ring(n: usize, length: f64) -> SpatialGrid1D {
    SpatialGrid1D::periodic(n, length).unwrap()
}

fn free_dirac() -> HamiltonianFactory {
    dirac_hamiltonian(&PhysicalParams::default(), &Potentials::zero()).unwrap()
}

fn packet(grid: &SpatialGrid1D, m: usize) -> GridFunction {
    let c = grid.length() / 2.0;
    let psi = GridFunction::from_fn(grid, m, |a, x| {
        C64::new(-(x - c).powi(2) / 2.0, 1.5 * x + a as f64).exp() * (1.0 + 0.3 * a as f64)
    });
    psi.scaled(C64::new(1.0 / psi.norm(), 0.0))
}

#[test]
fn dirac_norm_conserved_over_thousand_steps() {
    let grid = ring(64, 20.0);
    let p = EvolutionProblem::new(free_dirac(), grid.clone(), 0.0, 10.0, 0.01, Scheme::CrankNicolson).unwrap();
    let out = p.evolve(&packet(&grid, 4), 0.0, 10.0).unwrap();
    assert!((out.norm() - 1.0).abs() <= 1e-8);
}

#[test]
fn free_schrodinger_norm_conserved() {
    let params = PhysicalParams::default();
    let h = schrodinger_hamiltonian(&params, &Potentials::zero()).unwrap();
    let grid = ring(64, 20.0);
    let p = EvolutionProblem::new(h, grid.clone(), 0.0, 10.0, 0.01, Scheme::CrankNicolson).unwrap();
    let out = p.evolve(&packet(&grid, 1), 0.0, 10.0).unwrap();
    assert!((out.norm() - 1.0).abs() <= 1e-8);
}

#[test]
fn evolution_operator_composes_and_is_unitary() {
    let grid = ring(16, 2.0 * PI);
    let pot = Potentials::new(ScalarField::from_dynamic(|t, x| 0.4 * (x - t).sin()), ScalarField::Zero);
    let h = dirac_hamiltonian(&PhysicalParams::default(), &pot).unwrap();
    let p = EvolutionProblem::new(h, grid, 0.0, 1.0, 0.05, Scheme::CrankNicolson).unwrap();
    let u20 = p.evolution_operator(0.6, 0.0).unwrap();
    let u21 = p.evolution_operator(0.6, 0.25).unwrap();
    let u10 = p.evolution_operator(0.25, 0.0).unwrap();
    assert!(u20.max_abs_diff(&u21.compose(&u10).unwrap()) <= 1e-10);
    assert!(u20.unitarity_defect() < 1e-12);
}

#[test]
fn unitarity_after_thousand_steps() {
    let grid = ring(16, 2.0 * PI);
    let p = EvolutionProblem::new(free_dirac(), grid, 0.0, 10.0, 0.01, Scheme::CrankNicolson).unwrap();
    let u = p.evolution_operator(10.0, 0.0).unwrap();
    assert!(u.unitarity_defect() <= 1e-8);
}

#[test]
fn columns_match_stepped_basis_states() {
    let grid = ring(8, 2.0 * PI);
    let p = EvolutionProblem::new(free_dirac(), grid.clone(), 0.0, 1.0, 0.1, Scheme::CrankNicolson).unwrap();
    let u = p.evolution_operator(0.5, 0.0).unwrap();
    let psi = packet(&grid, 4);
    let direct = p.evolve(&psi, 0.0, 0.5).unwrap();
    assert!(u.apply(&psi).unwrap().max_abs_diff(&direct).unwrap() < 1e-12);
}

#[test]
fn crank_nicolson_is_second_order() {
    let e0 = 1.7;
    let err = |dt: f64| {
        let h = HamiltonianFactory::fixed(HamiltonianKind::Constant, MatrixOperator::diagonal(1, GridOperator::scale(e0)), 1.0);
        let grid = ring(8, 1.0);
        let p = EvolutionProblem::new(h, grid.clone(), 0.0, 1.0, dt, Scheme::CrankNicolson).unwrap();
        let psi = GridFunction::from_fn(&grid, 1, |_, _| C64::new(1.0, 0.0));
        let out = p.evolve(&psi, 0.0, 1.0).unwrap();
        (out.values()[0] - C64::new(0.0, -e0).exp()).norm()
    };
    let errs: Vec<f64> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&dt| err(dt)).collect();
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&rate), "rate {rate}");
    }
}

#[test]
fn time_translation_for_static_hamiltonian() {
    let grid = ring(16, 2.0 * PI);
    let p = EvolutionProblem::new(free_dirac(), grid, 0.0, 2.0, 0.05, Scheme::CrankNicolson).unwrap();
    let a = p.evolution_operator(0.5, 0.2).unwrap();
    let b = p.evolution_operator(1.5, 1.2).unwrap();
    assert!(a.max_abs_diff(&b) <= 1e-12);
}

#[test]
fn stationary_state_overlap_constant() {
    let grid = ring(16, 2.0 * PI);
    let params = PhysicalParams::default();
    let pot = Potentials::new(ScalarField::from_static(|x| 0.5 * x.cos()), ScalarField::Zero);
    let h = dirac_hamiltonian(&params, &pot).unwrap();
    let eig = h.dense(0.0, &grid).unwrap().symmetric_eigen();
    let v = eig.eigenvectors.column(5).into_owned();
    let psi_e = GridFunction::from_vector(&grid, 4, &v).unwrap();
    let p = EvolutionProblem::new(h, grid.clone(), 0.0, 5.0, 0.01, Scheme::CrankNicolson).unwrap();
    let psi0 = packet(&grid, 4).axpy(C64::new(0.5, 0.0), &psi_e).unwrap();
    let o0 = psi_e.inner(&psi0, &Default::default()).unwrap().norm();
    let traj = p.trajectory(&psi0, 0.0, 5.0, 50).unwrap();
    for s in traj.snapshots() {
        assert!((psi_e.inner(s, &Default::default()).unwrap().norm() - o0).abs() < 1e-8);
    }
}

#[test]
fn gaussian_width_doubles_on_schedule() {
    let params = PhysicalParams::default();
    let h = schrodinger_hamiltonian(&params, &Potentials::zero()).unwrap();
    let grid = ring(256, 40.0);
    let x0 = 20.0;
    let sigma0 = 1.0;
    let psi0 = GridFunction::from_fn(&grid, 1, |_, x| C64::new(-(x - x0).powi(2) / (4.0 * sigma0 * sigma0), 0.0).exp());
    let t = 2.0 * 3f64.sqrt();
    let dt = t / 350.0;
    let p = EvolutionProblem::new(h, grid.clone(), 0.0, t, dt, Scheme::CrankNicolson).unwrap();
    let out = p.evolve(&psi0, 0.0, t).unwrap();
    let width2 = |f: &GridFunction| {
        let w: Vec<f64> = f.values().iter().map(|z| z.norm_sqr()).collect();
        let total: f64 = w.iter().sum();
        let xs = grid.coordinates();
        let mean: f64 = xs.iter().zip(&w).map(|(x, p)| x * p).sum::<f64>() / total;
        xs.iter().zip(&w).map(|(x, p)| (x - mean).powi(2) * p).sum::<f64>() / total
    };
    assert!((width2(&psi0) - 1.0).abs() < 1e-6);
    let want = sigma0 * sigma0 * (1.0 + (t / (2.0 * sigma0 * sigma0)).powi(2));
    assert!(((width2(&out) - want) / want).abs() < 1e-3, "width² {} want {want}", width2(&out));
}

#[test]
fn positive_energy_expectation_of_free_dirac() {
    let params = PhysicalParams::new(1.3, 0.0, 1.0, 1.0).unwrap();
    let grid = ring(16, 2.0 * PI);
    let k = 2.0;
    let sym = dirac_symbol(&params, k);
    let eig = sym.symmetric_eigen();
    let top = eig.eigenvalues.imax();
    let u: Vec<C64> = eig.eigenvectors.column(top).iter().copied().collect();
    let psi = GridFunction::from_profile(&grid, &u, |x| C64::new(0.0, k * x).exp());
    let obs = Observable::hermitian(dirac_hamiltonian(&params, &Potentials::zero()).unwrap().at(0.0, &grid).unwrap());
    let e = expectation(&obs, &psi).unwrap();
    let want = (k * k + params.mass.powi(2)).sqrt();
    assert!((e.re - want).abs() < 1e-10 && e.im.abs() < 1e-10);
    let chi = packet(&grid, 4);
    assert!(obs.hermiticity_defect(&psi, &chi).unwrap() < 1e-10);
}

#[test]
fn dense_symbol_eigenvalues_are_paired() {
    let params = PhysicalParams::new(0.8, 0.0, 1.1, 1.7).unwrap();
    for k in [0.0, 0.5, 3.0] {
        let mut ev: Vec<f64> = dirac_symbol(&params, k).symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let e = ((params.hbar * k * params.c).powi(2) + params.rest_energy().powi(2)).sqrt();
        for (got, want) in ev.iter().zip([-e, -e, e, e]) {
            assert!((got - want).abs() < 1e-10);
        }
    }
}

#[test]
fn exponential_and_crank_nicolson_agree_for_small_steps() {
    let grid = ring(16, 2.0 * PI);
    let psi = packet(&grid, 4);
    let run = |s: Scheme| {
        EvolutionProblem::new(free_dirac(), grid.clone(), 0.0, 1.0, 1e-3, s)
            .unwrap()
            .evolve(&psi, 0.0, 1.0)
            .unwrap()
    };
    let d = run(Scheme::CrankNicolson).max_abs_diff(&run(Scheme::MidpointExponential)).unwrap();
    assert!(d < 1e-4);
}
