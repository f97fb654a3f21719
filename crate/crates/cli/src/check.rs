//! Invariant suites behind `relbundle check <suite>`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relbundle_core::algebra::{anticommutator_defect, dirac_gammas, GridOperator, MatrixOperator};
use relbundle_core::bundle::{flat_transport, transport_from_frames, BasePoint, Trivialization};
use relbundle_core::evolution::{EvolutionProblem, Scheme};
use relbundle_core::green::{born_series_green, eigenbasis, propagate_via_green, retarded_green_dirac, retarded_green_schrodinger};
use relbundle_core::reduction::*;
use relbundle_core::{inner, FibreProduct, GridFunction, SpatialGrid1D, C64};

use crate::error::CliError;

pub const SUITES: [&str; 7] = ["algebra", "grid", "reduction", "evolution", "bundle", "green", "all"];

/// One measured invariant.
#[derive(Clone, Debug)]
pub struct CheckLine {
    pub suite: &'static str,
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value <= self.tolerance
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{}: {:.3e} (tolerance {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.value,
            self.tolerance
        )
    }
}

type Outcome = Result<Vec<CheckLine>, CliError>;

struct Suite {
    name: &'static str,
    scale: f64,
    lines: Vec<CheckLine>,
}

impl Suite {
    fn new(name: &'static str, scale: f64) -> Self {
        Self {
            name,
            scale,
            lines: Vec::new(),
        }
    }

    fn record(&mut self, name: &'static str, value: f64, tolerance: f64) {
        self.lines.push(CheckLine {
            suite: self.name,
            name,
            value,
            tolerance: tolerance * self.scale,
        });
    }

    /// Records a failed computation as an infinite residual.
    fn record_result(&mut self, name: &'static str, value: relbundle_core::Result<f64>, tolerance: f64) {
        self.record(name, value.unwrap_or(f64::INFINITY), tolerance);
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize, spread: f64) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |i, j| {
        let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * spread;
        if i == j { z + 1.0 } else { z }
    })
}

fn random_state(rng: &mut ChaCha8Rng, grid: &SpatialGrid1D, m: usize) -> GridFunction {
    let psi = GridFunction::from_fn(grid, m, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    psi.scaled(C64::new(1.0 / psi.norm(), 0.0))
}

fn ring(n: usize, length: f64) -> SpatialGrid1D {
    SpatialGrid1D::periodic(n, length).expect("fixed grid is valid")
}

fn algebra(seed: u64, scale: f64) -> Outcome {
    let mut s = Suite::new("algebra", scale);
    s.record("dirac-anticommutator", anticommutator_defect(&dirac_gammas()), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = ring(16, 2.0 * PI);
    let random_op = |rng: &mut ChaCha8Rng| {
        MatrixOperator::from_fn(2, |_, _| {
            let w: Vec<C64> = (0..16).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            GridOperator::multiply(w).plus(&GridOperator::derivative(1).scaled(rng.random_range(-1.0..1.0)))
        })
    };
    let (a, b) = (random_op(&mut rng), random_op(&mut rng));
    let psi = random_state(&mut rng, &grid, 2);
    let composed = a.odot(&b).and_then(|ab| ab.apply(&psi)).and_then(|x| b.apply(&psi).and_then(|bp| a.apply(&bp)).and_then(|y| x.max_abs_diff(&y)));
    s.record_result("odot-is-composition", composed, 1e-10);
    let dense = a
        .odot(&b)
        .and_then(|ab| ab.to_dense(&grid))
        .and_then(|ab| Ok(max_abs(&(ab - a.to_dense(&grid)? * b.to_dense(&grid)?))));
    s.record_result("dense-multiplicativity", dense, 1e-9);
    Ok(s.lines)
}

fn grid_suite(seed: u64, scale: f64) -> Outcome {
    let mut s = Suite::new("grid", scale);
    let grid = ring(32, 2.0 * PI);
    let f = GridFunction::from_fn(&grid, 1, |_, x| C64::new((3.0 * x).sin(), 0.0));
    let exact = GridFunction::from_fn(&grid, 1, |_, x| C64::new(3.0 * (3.0 * x).cos(), 0.0));
    s.record_result("spectral-derivative", f.derivative(1).and_then(|d| d.max_abs_diff(&exact)), 1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (u, v) = (random_state(&mut rng, &grid, 2), random_state(&mut rng, &grid, 2));
    let herm = inner(&u, &v, &FibreProduct::Identity).and_then(|a| Ok((a - inner(&v, &u, &FibreProduct::Identity)?.conj()).norm()));
    s.record_result("inner-hermitian", herm, 1e-14);
    let triangle = u.axpy(C64::new(1.0, 0.0), &v).map(|w| (w.norm() - u.norm() - v.norm()).max(0.0));
    s.record_result("triangle-inequality", triangle, 0.0);
    Ok(s.lines)
}

fn reduction(_seed: u64, scale: f64) -> Outcome {
    let mut s = Suite::new("reduction", scale);
    let omega = 2.0;
    let grid = ring(8, 1.0);
    let companion = LinearTimeSystem::scalar(1.0, &[C64::new(-omega * omega, 0.0), C64::new(0.0, 0.0)]).and_then(|sys| {
        let p = EvolutionProblem::new(companion_hamiltonian(&sys), grid.clone(), 0.0, 1.0, 1e-4, Scheme::CrankNicolson)?;
        let psi = GridFunction::from_fn(&grid, 2, |a, _| C64::new(if a == 0 { 0.7 } else { -0.3 }, 0.0));
        let out = p.evolve(&psi, 0.0, 1.0)?;
        let exact = omega.cos() * 0.7 - omega.sin() * 0.3 / omega;
        Ok(out.component(0).iter().map(|z| (z - exact).norm() / exact.abs()).fold(0.0, f64::max))
    });
    s.record_result("companion-closed-form", companion, 1e-6);

    let params = PhysicalParams::default();
    let g16 = ring(16, 2.0 * PI);
    let pot = Potentials::new(ScalarField::from_static(|x| 0.3 * x.cos()), ScalarField::from_static(|x| 0.2 * x.sin()));
    let gauge = (|| {
        let via = gauge_transform(&kg_canonical_hamiltonian(&params, &pot)?, &kg_nonrel_frame(&params)?)?.dense(0.0, &g16)?;
        let direct = kg_nonrel_hamiltonian(&params, &pot)?.dense(0.0, &g16)?;
        Ok(max_abs(&(via - direct)))
    })();
    s.record_result("kg-nonrel-gauge", gauge, 1e-10);

    let mut worst: f64 = 0.0;
    for k in [-3.0, -0.5, 0.0, 1.0, 2.5] {
        let e = dirac_symbol(&params, k).symmetric_eigenvalues();
        let exact = (k * k + 1.0f64).sqrt();
        for v in e.iter() {
            worst = worst.max((v.abs() - exact).abs());
        }
    }
    s.record("dirac-dispersion", worst, 1e-10);
    Ok(s.lines)
}

fn evolution(seed: u64, scale: f64) -> Outcome {
    let mut s = Suite::new("evolution", scale);
    let params = PhysicalParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free = dirac_hamiltonian(&params, &Potentials::zero());
    let grid = ring(64, 20.0);
    let unitarity = free.clone().and_then(|h| {
        let p = EvolutionProblem::new(h, grid.clone(), 0.0, 10.0, 0.01, Scheme::CrankNicolson)?;
        Ok((p.evolve(&random_state(&mut rng, &grid, 4), 0.0, 10.0)?.norm() - 1.0).abs())
    });
    s.record_result("norm-after-1000-steps", unitarity, 1e-8);
    let g16 = ring(16, 2.0 * PI);
    let pot = Potentials::new(ScalarField::from_dynamic(|t, x| 0.4 * (x - t).sin()), ScalarField::Zero);
    let composition = dirac_hamiltonian(&params, &pot).and_then(|h| {
        let p = EvolutionProblem::new(h, g16.clone(), 0.0, 1.0, 0.05, Scheme::CrankNicolson)?;
        let u20 = p.evolution_operator(0.6, 0.0)?;
        Ok(u20.max_abs_diff(&p.evolution_operator(0.6, 0.25)?.compose(&p.evolution_operator(0.25, 0.0)?)?))
    });
    s.record_result("composition", composition, 1e-10);
    Ok(s.lines)
}

fn bundle(seed: u64, scale: f64) -> Outcome {
    let mut s = Suite::new("bundle", scale);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames: Vec<_> = (0..12).map(|_| random_matrix(&mut rng, 3, 0.3)).collect();
    let laws = transport_from_frames(frames).and_then(|t| {
        let g = t.regauged(&random_matrix(&mut rng, 3, 0.4))?;
        let mut worst = [0.0f64; 3];
        for _ in 0..100 {
            let (a, b, c) = (rng.random_range(0..12), rng.random_range(0..12), rng.random_range(0..12));
            worst[0] = worst[0].max(max_abs(&(t.matrix(c, b) * t.matrix(b, a) - t.matrix(c, a))));
            worst[1] = worst[1].max(max_abs(&(t.matrix(a, a) - DMatrix::identity(3, 3))));
            worst[2] = worst[2].max(max_abs(&(g.matrix(c, a) - t.matrix(c, a))));
        }
        Ok(worst)
    });
    let laws = laws.unwrap_or([f64::INFINITY; 3]);
    s.record("transport-composition", laws[0], 1e-12);
    s.record("transport-identity", laws[1], 1e-12);
    s.record("frame-gauge-invariance", laws[2], 1e-12);

    let l = Trivialization::from_fn(2, |p| {
        DMatrix::from_row_slice(2, 2, &[
            C64::new(2.0 + p.x.sin(), 0.1 * p.t),
            C64::new(0.3, 0.0),
            C64::new(0.0, 0.2 * p.x),
            C64::new(1.5, p.t.cos()),
        ])
    });
    let path_independence = flat_transport(l, 1.0).and_then(|flat| {
        let (a, c) = (BasePoint::new(0.0, 0.0), BasePoint::new(-0.4, 2.1));
        let wiggly: Vec<_> = (0..=20)
            .map(|i| {
                let t = i as f64 / 20.0;
                BasePoint::new(-0.4 * t + (PI * t).sin(), 2.1 * t * t)
            })
            .collect();
        Ok(max_abs(&(flat.chain(&wiggly)? - flat.chain(&[a, BasePoint::new(-0.2, 1.0), c])?)))
    });
    s.record_result("flat-path-independence", path_independence, 1e-12);
    Ok(s.lines)
}

fn green(seed: u64, scale: f64) -> Outcome {
    let mut s = Suite::new("green", scale);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = PhysicalParams::default();
    let well = Potentials::new(ScalarField::from_static(|x| 0.5 * x.cos()), ScalarField::Zero);
    let exact = |h: HamiltonianFactory, grid: &SpatialGrid1D, psi: &GridFunction| {
        EvolutionProblem::new(h, grid.clone(), 0.0, 1.0, 0.05, Scheme::MidpointExponential)?.evolve(psi, 0.0, 1.0)
    };
    let g32 = ring(32, 2.0 * PI);
    let psi = random_state(&mut rng, &g32, 1);
    let schr = schrodinger_hamiltonian(&params, &well).and_then(|h| {
        let basis = eigenbasis(&h, &g32)?;
        propagate_via_green(&retarded_green_schrodinger(&basis, 1.0, 0.0), &psi)?.max_abs_diff(&exact(h, &g32, &psi)?)
    });
    s.record_result("schrodinger-duality", schr, 1e-8);
    let g16 = ring(16, 2.0 * PI);
    let spinor = random_state(&mut rng, &g16, 4);
    let dirac = dirac_hamiltonian(&params, &well).and_then(|h| {
        let basis = eigenbasis(&h, &g16)?;
        propagate_via_green(&retarded_green_dirac(&basis, 1.0, 0.0)?, &spinor)?.max_abs_diff(&exact(h, &g16, &spinor)?)
    });
    s.record_result("dirac-duality", dirac, 1e-8);
    let retarded = dirac_hamiltonian(&params, &Potentials::zero()).and_then(|h| {
        let basis = eigenbasis(&h, &g16)?;
        let g = born_series_green(&basis, &params, &well, 0.0, 1.0, 10, 2)?;
        Ok(if g.is_zero() { 0.0 } else { 1.0 })
    });
    s.record_result("born-retardedness", retarded, 0.0);
    Ok(s.lines)
}

/// Runs one suite, or every suite for `all`.
pub fn check(suite: &str, seed: u64, tolerance_scale: f64) -> Outcome {
    let run: &[fn(u64, f64) -> Outcome] = match suite {
        "algebra" => &[algebra],
        "grid" => &[grid_suite],
        "reduction" => &[reduction],
        "evolution" => &[evolution],
        "bundle" => &[bundle],
        "green" => &[green],
        "all" => &[algebra, grid_suite, reduction, evolution, bundle, green],
        other => {
            return Err(CliError::UnknownSuite {
                name: other.to_string(),
                available: SUITES.join(", "),
            })
        }
    };
    let mut lines = Vec::new();
    for f in run {
        lines.extend(f(seed, tolerance_scale)?);
    }
    Ok(lines)
}
