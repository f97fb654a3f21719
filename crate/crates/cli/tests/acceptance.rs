//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line with the
//! measured value and its pinned tolerance (visible with `--nocapture`).

use std::f64::consts::PI;
use std::fs;
use std::process::Command;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relbundle_core::algebra::{anticommutator_defect, dirac_gammas, kg_gammas};
use relbundle_core::bundle::*;
use relbundle_core::evolution::{EvolutionProblem, Scheme};
use relbundle_core::green::*;
use relbundle_core::reduction::*;
use relbundle_core::{GridFunction, SpatialGrid1D, C64};

const TOL_NORM: f64 = 1e-8;
const TOL_COMPOSITION: f64 = 1e-10;
const TOL_DUALITY: f64 = 1e-8;
const TOL_COMPANION: f64 = 1e-6;
const TOL_KG5D: f64 = 1e-6;
const TOL_NONREL: f64 = 1e-10;
const TOL_DIRAC_SYMBOL: f64 = 1e-10;
const TOL_KG_FREQUENCY: f64 = 1e-4;
const TOL_TRANSPORT: f64 = 1e-12;
const MIN_DERIVATION_ORDER: f64 = 0.9;
const TOL_GAMMA_RELATION: f64 = 1e-8;
const BORN_FACTOR: f64 = 1.5;
const TOL_CHARGE: f64 = 1e-8;

/// Prints the criterion line and fails the test when `ok` is false.
fn report(name: &str, ok: bool, detail: String) {
    let line = format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    println!("{line}");
    assert!(ok, "{line}");
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn ring(n: usize, length: f64) -> SpatialGrid1D {
    SpatialGrid1D::periodic(n, length).unwrap()
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn random_state(rng: &mut ChaCha8Rng, grid: &SpatialGrid1D, m: usize) -> GridFunction {
    let psi = GridFunction::from_fn(grid, m, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    psi.scaled(C64::new(1.0 / psi.norm(), 0.0))
}

fn plane(grid: &SpatialGrid1D, k: f64, amp: C64) -> GridFunction {
    GridFunction::from_fn(grid, 1, |_, x| amp * C64::new(0.0, k * x).exp())
}

#[test]
fn clifford_exactness() {
    let defect = anticommutator_defect(&dirac_gammas());
    report("clifford exactness", defect == 0.0, format!("anticommutator defect = {defect:e} (required exactly 0)"));
}

#[test]
fn kg_gamma_table() {
    // rows i, columns j; Γ^μ has 1 at (μ, 4) and η_μμ at (4, μ)
    let tables: [[[f64; 5]; 5]; 4] = [
        [
            [0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0, 0.0],
        ],
        [
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0, 0.0],
        ],
        [
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 0.0, 0.0],
        ],
        [
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, -1.0, 0.0],
        ],
    ];
    let set = kg_gammas();
    let mut mismatches = 0;
    for (mu, table) in tables.iter().enumerate() {
        for (i, row) in table.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if set.gamma(mu)[(i, j)] != C64::new(*v, 0.0) {
                    mismatches += 1;
                }
            }
        }
    }
    report("kg gamma table", mismatches == 0, format!("{mismatches} of 100 entries differ (required 0)"));
}

#[test]
fn unitarity_free_dirac() {
    let grid = ring(64, 20.0);
    let h = dirac_hamiltonian(&PhysicalParams::default(), &Potentials::zero()).unwrap();
    let p = EvolutionProblem::new(h, grid.clone(), 0.0, 10.0, 0.01, Scheme::CrankNicolson).unwrap();
    let c = grid.length() / 2.0;
    let psi = GridFunction::from_fn(&grid, 4, |a, x| C64::new(-(x - c).powi(2) / 2.0, 1.5 * x + a as f64).exp());
    let psi = psi.scaled(C64::new(1.0 / psi.norm(), 0.0));
    let dev = (p.evolve(&psi, 0.0, 10.0).unwrap().norm() - 1.0).abs();
    report(
        "unitarity (free Dirac, N = 64, 1000 CN steps)",
        dev <= TOL_NORM,
        format!("|‖ψ‖ − 1| = {dev:.3e} (tolerance {TOL_NORM:e})"),
    );
}

#[test]
fn evolution_composition() {
    // N·m = 256 with a time-dependent potential
    let grid = ring(64, 2.0 * PI);
    let pot = Potentials::new(ScalarField::from_dynamic(|t, x| 0.4 * (x - t).sin()), ScalarField::from_static(|x| 0.1 * x.cos()));
    let h = dirac_hamiltonian(&PhysicalParams::default(), &pot).unwrap();
    let p = EvolutionProblem::new(h, grid, 0.0, 1.0, 0.05, Scheme::CrankNicolson).unwrap();
    let u20 = p.evolution_operator(0.6, 0.0).unwrap();
    let chained = p.evolution_operator(0.6, 0.25).unwrap().compose(&p.evolution_operator(0.25, 0.0).unwrap()).unwrap();
    let dev = u20.max_abs_diff(&chained);
    report(
        "evolution composition (N·m = 256)",
        dev <= TOL_COMPOSITION,
        format!("‖U(t₂,t₀) − U(t₂,t₁)U(t₁,t₀)‖_max = {dev:.3e} (tolerance {TOL_COMPOSITION:e})"),
    );
}

#[test]
fn green_evolution_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let params = PhysicalParams::default();
    let well = Potentials::new(ScalarField::from_static(|x| 0.5 * x.cos()), ScalarField::Zero);
    let exact = |h: HamiltonianFactory, grid: &SpatialGrid1D| {
        EvolutionProblem::new(h, grid.clone(), 0.0, 1.0, 0.05, Scheme::MidpointExponential).unwrap()
    };
    let grid = ring(32, 2.0 * PI);
    let h = schrodinger_hamiltonian(&params, &well).unwrap();
    let basis = eigenbasis(&h, &grid).unwrap();
    let g = retarded_green_schrodinger(&basis, 1.0, 0.0);
    let p = exact(h, &grid);
    let mut schr: f64 = 0.0;
    for _ in 0..8 {
        let psi = random_state(&mut rng, &grid, 1);
        schr = schr.max(propagate_via_green(&g, &psi).unwrap().max_abs_diff(&p.evolve(&psi, 0.0, 1.0).unwrap()).unwrap());
    }
    let h = dirac_hamiltonian(&params, &well).unwrap();
    let basis = eigenbasis(&h, &grid).unwrap();
    let g = retarded_green_dirac(&basis, 1.0, 0.0).unwrap();
    let p = exact(h, &grid);
    let mut dirac: f64 = 0.0;
    for _ in 0..8 {
        let psi = random_state(&mut rng, &grid, 4);
        dirac = dirac.max(propagate_via_green(&g, &psi).unwrap().max_abs_diff(&p.evolve(&psi, 0.0, 1.0).unwrap()).unwrap());
    }
    report(
        "Green-evolution duality (N = 32)",
        schr <= TOL_DUALITY && dirac <= TOL_DUALITY,
        format!("Schrödinger {schr:.3e}, Dirac with γ⁰ weight {dirac:.3e} (tolerance {TOL_DUALITY:e})"),
    );
}

#[test]
fn companion_reduction_fidelity() {
    // f'' + 2γf' + ω²f = 0, closed form for the underdamped case
    let (omega, gamma) = (2.0f64, 0.3f64);
    let sys = LinearTimeSystem::scalar(1.0, &[C64::new(-omega * omega, 0.0), C64::new(-2.0 * gamma, 0.0)]).unwrap();
    let grid = ring(8, 1.0);
    let p = EvolutionProblem::new(companion_hamiltonian(&sys), grid.clone(), 0.0, 1.0, 1e-4, Scheme::CrankNicolson).unwrap();
    let (f0, v0) = (0.7, -0.3);
    let psi = GridFunction::from_fn(&grid, 2, |a, _| C64::new(if a == 0 { f0 } else { v0 }, 0.0));
    let out = p.evolve(&psi, 0.0, 1.0).unwrap();
    let wd = (omega * omega - gamma * gamma).sqrt();
    let exact = (-gamma).exp() * (f0 * wd.cos() + (v0 + gamma * f0) / wd * wd.sin());
    let rel = out.component(0).iter().map(|z| (z - exact).norm() / exact.abs()).fold(0.0, f64::max);
    report(
        "companion reduction fidelity (t = 1, dt = 1e-4)",
        rel <= TOL_COMPANION,
        format!("relative error {rel:.3e} (tolerance {TOL_COMPANION:e})"),
    );
}

#[test]
fn kg_cross_form_equivalence() {
    let params = PhysicalParams::new(1.5, 0.0, 1.0, 1.0).unwrap();
    let grid = ring(16, 2.0 * PI);
    let k = 2.0;
    let omega = (k * k + params.mass.powi(2)).sqrt();
    let phi = plane(&grid, k, C64::new(1.0, 0.0));
    let phi_t = phi.scaled(C64::new(0.0, -omega));
    let run = |h: HamiltonianFactory, psi: &GridFunction| {
        EvolutionProblem::new(h, grid.clone(), 0.0, 1.0, 1e-3, Scheme::CrankNicolson).unwrap().evolve(psi, 0.0, 1.0).unwrap()
    };
    let canonical_state = GridFunction::stack(&[phi.clone(), phi_t.clone()]).unwrap();
    let canonical = run(kg_canonical_hamiltonian(&params, &Potentials::zero()).unwrap(), &canonical_state);
    let five = run(kg_5d_hamiltonian(&params).unwrap(), &kg5d_state_from_scalar(&params, &phi, &phi_t).unwrap());
    let first = five.slice_components(0, 1).unwrap().scaled(C64::new(1.0 / params.rest_energy(), 0.0));
    let dev5 = first.max_abs_diff(&canonical.slice_components(0, 1).unwrap()).unwrap();

    let frame = kg_nonrel_frame(&params).unwrap();
    let s = frame.at(0.0).unwrap();
    let to_nonrel = |psi: &GridFunction| {
        let n = grid.len();
        let mut out = GridFunction::zeros(&grid, 2);
        for j in 0..n {
            let p = psi.point(j);
            let v = [s[(0, 0)] * p[0] + s[(0, 1)] * p[1], s[(1, 0)] * p[0] + s[(1, 1)] * p[1]];
            out.set_point(j, &v);
        }
        out
    };
    let nonrel = run(kg_nonrel_hamiltonian(&params, &Potentials::zero()).unwrap(), &to_nonrel(&canonical_state));
    let dev_nr = nonrel.max_abs_diff(&to_nonrel(&canonical)).unwrap();
    report(
        "KG cross-form equivalence",
        dev5 <= TOL_KG5D && dev_nr <= TOL_NONREL,
        format!(
            "kg-5d/(mc²) vs canonical φ {dev5:.3e} (tolerance {TOL_KG5D:e}); kg-nonrel vs framed canonical {dev_nr:.3e} (tolerance {TOL_NONREL:e})"
        ),
    );
}

#[test]
fn dispersion() {
    let params = PhysicalParams::new(1.2, 0.0, 1.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for k in [-4.0, -1.5, 0.0, 0.5, 3.0] {
        let want = ((params.hbar * k * params.c).powi(2) + params.rest_energy().powi(2)).sqrt();
        let mut e: Vec<f64> = dirac_symbol(&params, k).symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        for (got, sign) in e.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            worst = worst.max((got - sign * want).abs());
        }
    }

    let h = kg_canonical_hamiltonian(&params, &Potentials::zero()).unwrap();
    let grid = ring(32, 2.0 * PI);
    let k = 3.0;
    let omega = (params.c * params.c * k * k + (params.rest_energy() / params.hbar).powi(2)).sqrt();
    let dt = 0.01 / omega;
    let p = EvolutionProblem::new(h, grid.clone(), 0.0, 1000.0 * dt, dt, Scheme::CrankNicolson).unwrap();
    let phi = plane(&grid, k, C64::new(1.0, 0.0));
    let state = GridFunction::stack(&[phi.clone(), phi.scaled(C64::new(0.0, -omega))]).unwrap();
    let traj = p.trajectory(&state, 0.0, p.end(), 10).unwrap();
    let measured = traj.frequency(&state).unwrap();
    let rel = ((measured - omega) / omega).abs();
    report(
        "dispersion",
        worst <= TOL_DIRAC_SYMBOL && rel <= TOL_KG_FREQUENCY,
        format!(
            "Dirac symbol max deviation {worst:.3e} (tolerance {TOL_DIRAC_SYMBOL:e}); KG frequency relative error {rel:.3e} (tolerance {TOL_KG_FREQUENCY:e})"
        ),
    );
}

fn random_frame(rng: &mut ChaCha8Rng, d: usize, spread: f64) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |i, j| {
        let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * spread;
        if i == j { z + 1.0 } else { z }
    })
}

#[test]
fn transport_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let frames: Vec<_> = (0..16).map(|_| random_frame(&mut rng, 4, 0.3)).collect();
    let t = transport_from_frames(frames).unwrap();
    let g = t.regauged(&random_frame(&mut rng, 4, 0.4)).unwrap();
    let mut worst = [0.0f64; 3];
    for _ in 0..100 {
        let (a, b, c) = (rng.random_range(0..16), rng.random_range(0..16), rng.random_range(0..16));
        worst[0] = worst[0].max(max_abs(&(t.matrix(c, b) * t.matrix(b, a) - t.matrix(c, a))));
        worst[1] = worst[1].max(max_abs(&(t.matrix(a, a) - DMatrix::identity(4, 4))));
        worst[2] = worst[2].max(max_abs(&(g.matrix(c, a) - t.matrix(c, a))));
    }

    let l = Trivialization::from_fn(2, |p| {
        DMatrix::from_row_slice(2, 2, &[
            C64::new(2.0 + p.x.sin(), 0.1 * p.t),
            C64::new(0.3, 0.0),
            C64::new(0.0, 0.2 * p.x),
            C64::new(1.5, p.t.cos()),
        ])
    });
    let flat = flat_transport(l, 1.0).unwrap();
    let (a, c) = (BasePoint::new(0.0, 0.0), BasePoint::new(-0.4, 2.1));
    let wiggly: Vec<_> = (0..=20)
        .map(|i| {
            let s = i as f64 / 20.0;
            BasePoint::new(-0.4 * s + (PI * s).sin(), 2.1 * s * s)
        })
        .collect();
    let path = max_abs(&(flat.chain(&wiggly).unwrap() - flat.chain(&[a, BasePoint::new(-0.2, 1.0), c]).unwrap()));
    let all = worst.iter().copied().fold(path, f64::max);
    report(
        "transport laws (100 random triples)",
        all <= TOL_TRANSPORT,
        format!(
            "composition {:.3e}, identity {:.3e}, frame-gauge invariance {:.3e}, flat path independence {path:.3e} (tolerance {TOL_TRANSPORT:e})",
            worst[0], worst[1], worst[2]
        ),
    );
}

fn bundle_setup() -> (SpatialGrid1D, HamiltonianFactory, Trivialization) {
    let grid = ring(16, 8.0 * PI);
    let pot = Potentials::new(ScalarField::from_static(|x| 0.2 * (x / 4.0).cos()), ScalarField::Zero);
    let h = dirac_hamiltonian(&PhysicalParams::default(), &pot).unwrap();
    let l = Trivialization::phase_field(4, |p| 0.4 * p.t + 0.25 * p.x.sin(), |p| (0.4, 0.25 * p.x.cos()));
    (grid, h, l)
}

#[test]
fn bundle_schrodinger_equation() {
    let (grid, h, l) = bundle_setup();
    let c = grid.length() / 2.0;
    let psi0 = GridFunction::from_fn(&grid, 4, |a, x| C64::new(-(x - c).powi(2) / 8.0, 0.5 * x + a as f64).exp()).to_vector();
    let residual = |delta: f64| {
        let p = EvolutionProblem::new(h.clone(), grid.clone(), 0.0, 1.0, delta, Scheme::MidpointExponential).unwrap();
        let path = PathSampling::uniform(0.0, delta, 5, |t| 0.3 * t).unwrap();
        let t = evolution_transport(&p, &l, &path).unwrap();
        let lam = Lifting::transported(&t, 0, &psi0).unwrap();
        derivation_along_path(&t, &lam, 2, DerivationMode::Analytic).unwrap().norm()
    };
    let r: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&d| residual(d)).collect();
    let order = r.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);

    // Γ = −Ĥ/(iħ) = (i/ħ)Ĥ on interior samples of a moving observer
    let dt = 0.005;
    let p = EvolutionProblem::new(h.clone(), grid.clone(), 0.0, 1.0, dt, Scheme::MidpointExponential).unwrap();
    let path = PathSampling::uniform(0.0, dt, 9, |t| 0.3 * t).unwrap();
    let t = evolution_transport(&p, &l, &path).unwrap();
    let gamma = transport_coefficients(&t).unwrap();
    let hb = matrix_bundle_hamiltonian(&h, &grid, &l, &path).unwrap();
    let hbar = h.hbar();
    let relation = (2..7)
        .map(|i| max_abs(&(gamma.get(i) + &hb[i] / C64::new(0.0, hbar))))
        .fold(0.0, f64::max);
    report(
        "bundle Schrödinger equation",
        order >= MIN_DERIVATION_ORDER && relation <= TOL_GAMMA_RELATION,
        format!(
            "derivation norms {} give order {order:.2} (minimum {MIN_DERIVATION_ORDER}); ‖Γ + Ĥ/(iħ)‖_max = {relation:.3e} (tolerance {TOL_GAMMA_RELATION:e})",
            sci(&r)
        ),
    );
}

#[test]
fn born_series_scaling() {
    let grid = ring(16, 16.0);
    let params = PhysicalParams::default();
    let free = eigenbasis(&dirac_hamiltonian(&params, &Potentials::zero()).unwrap(), &grid).unwrap();
    let error = |eps: f64| {
        let l = grid.length();
        let pot = Potentials::new(
            ScalarField::from_static(move |x| eps * (2.0 * PI * x / l).cos()),
            ScalarField::from_static(move |x| 0.5 * eps * (2.0 * PI * x / l).sin()),
        );
        let full = eigenbasis(&dirac_hamiltonian(&params, &pot).unwrap(), &grid).unwrap();
        let exact = retarded_green_dirac(&full, 1.0, 0.0).unwrap();
        born_series_green(&free, &params, &pot, 1.0, 0.0, 100, 1).unwrap().max_abs_diff(&exact).unwrap()
    };
    let errors: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&e| error(e)).collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = ratios.iter().all(|r| (4.0 / BORN_FACTOR..=4.0 * BORN_FACTOR).contains(r));
    report(
        "Born series ε² scaling",
        ok,
        format!(
            "errors {}, halving ratios {ratios:.3?} (required within ×{BORN_FACTOR} of 4)",
            sci(&errors)
        ),
    );
}

#[test]
fn free_kg_charge_conservation() {
    let params = PhysicalParams::default();
    let grid = ring(32, 2.0 * PI);
    let p = EvolutionProblem::new(
        kg_canonical_hamiltonian(&params, &Potentials::zero()).unwrap(),
        grid.clone(),
        0.0,
        10.0,
        0.01,
        Scheme::CrankNicolson,
    )
    .unwrap();
    let phi = GridFunction::from_fn(&grid, 1, |_, x| C64::new((-(x - PI).powi(2)).exp(), 0.3 * x.sin()));
    let phi_t = GridFunction::from_fn(&grid, 1, |_, x| C64::new(0.2 * x.cos(), -(-(x - 2.0).powi(2)).exp()));
    let state = GridFunction::stack(&[phi, phi_t]).unwrap();
    let q0 = kg_charge(&state).unwrap();
    let traj = p.trajectory(&state, 0.0, 10.0, 10).unwrap();
    let dev = traj.snapshots().iter().map(|s| (kg_charge(s).unwrap() - q0).abs()).fold(0.0, f64::max);
    report(
        "free KG charge conservation (1000 steps)",
        dev <= TOL_CHARGE,
        format!("max |Q(t) − Q(0)| = {dev:.3e} with Q(0) = {q0:.4} (tolerance {TOL_CHARGE:e})"),
    );
}

#[test]
fn cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "[equation]\nname = dirac\nmass = 0.8\n\n[grid]\npoints = 32\nlength = 12\n\n[time]\nend = 2\nstep = 0.01\n\n\
         [initial]\nkind = gaussian\nwidth = 1\nwavenumber = 1.2\n\n[potential]\nkind = harmonic\nfrequency = 0.4\n\n\
         [trivialization]\nkind = phase-field\nrate = 0.3\namplitude = 0.2\n\n\
         [output]\nevery = 20\nobservables = position, momentum, energy\n",
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_relbundle");
    let outputs: Vec<_> = ["a", "b"]
        .iter()
        .map(|d| {
            let out = dir.path().join(d);
            let status = Command::new(bin).arg("run").arg(&cfg).arg("--out").arg(&out).status().unwrap();
            assert!(status.success());
            ["report.csv", "state.csv"].map(|f| fs::read(out.join(f)).unwrap())
        })
        .collect();
    let identical = outputs[0] == outputs[1];
    let bytes: usize = outputs[0].iter().map(|b| b.len()).sum();
    report(
        "CLI determinism",
        identical,
        format!("report.csv and state.csv ({bytes} bytes) identical across two runs: {identical}"),
    );
}
