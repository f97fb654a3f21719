//! Run orchestration: builds the Hamiltonian, initial state and
//! trivialization from a [`RunConfig`], evolves, and writes CSV artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use relbundle_core::algebra::{GridOperator, MatrixOperator};
use relbundle_core::bundle::{BasePoint, Trivialization};
use relbundle_core::evolution::{expectation, EvolutionProblem, Observable, Scheme, Trajectory, DENSE_LIMIT};
use relbundle_core::green::{
    eigenbasis, kg_green_vector, kg_scalar_slices, propagate_via_green, retarded_green_dirac,
    retarded_green_schrodinger, GreenKernel,
};
use relbundle_core::reduction::*;
use relbundle_core::{inner, FibreProduct, GridFunction, SpatialGrid1D, C64};

use crate::config::*;
use crate::error::{CliError, ConfigError, Phase};

/// Shortest round-trip float text; `-0` is written as `0`.
fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub t: f64,
    pub norm: f64,
    pub observables: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Per-snapshot norms, observable expectations and invariant residuals.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub observable_names: Vec<String>,
    pub residual_names: Vec<String>,
    pub rows: Vec<ReportRow>,
    /// Frequency of `⟨ψ₀|ψ(t)⟩ ∝ e^{−iωt}`, when the overlap never vanishes.
    pub frequency: Option<f64>,
    pub timings: Vec<(&'static str, Duration)>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,norm");
        for n in self.observable_names.iter().chain(&self.residual_names) {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for r in &self.rows {
            s.push_str(&num(r.t));
            for v in std::iter::once(&r.norm).chain(&r.observables).chain(&r.residuals) {
                s.push(',');
                s.push_str(&num(*v));
            }
            s.push('\n');
        }
        s
    }

    /// Largest value of the named residual column.
    pub fn max_residual(&self, name: &str) -> Option<f64> {
        let i = self.residual_names.iter().position(|n| n == name)?;
        self.rows.iter().map(|r| r.residuals[i]).reduce(f64::max)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "snapshots = {}", self.rows.len());
        if let Some(last) = self.rows.last() {
            let _ = writeln!(s, "final-norm = {}", num(last.norm));
        }
        for n in &self.residual_names {
            let _ = writeln!(s, "max-{n} = {}", num(self.max_residual(n).unwrap_or(0.0)));
        }
        if let Some(f) = self.frequency {
            let _ = writeln!(s, "frequency = {}", num(f));
        }
        for (phase, d) in &self.timings {
            let _ = writeln!(s, "time-{phase} = {:.6}s", d.as_secs_f64());
        }
        s
    }
}

pub fn build_grid(config: &RunConfig) -> Result<SpatialGrid1D, CliError> {
    let g = &config.grid;
    SpatialGrid1D::new(g.points, g.length, g.boundary).phase("grid")
}

pub fn build_potentials(config: &RunConfig) -> Potentials {
    let p = &config.equation.params;
    match &config.potential {
        PotentialSpec::None => Potentials::zero(),
        PotentialSpec::Constant { scalar, vector } => {
            Potentials::new(ScalarField::Constant(*scalar), ScalarField::Constant(*vector))
        }
        PotentialSpec::Harmonic { frequency, center } => {
            let (k, x0) = (p.mass * frequency * frequency / p.charge, *center);
            Potentials::new(ScalarField::from_static(move |x| 0.5 * k * (x - x0).powi(2)), ScalarField::Zero)
        }
        PotentialSpec::Samples { scalar, vector } => {
            Potentials::new(ScalarField::samples(scalar.clone()), ScalarField::samples(vector.clone()))
        }
    }
}

pub fn build_hamiltonian(config: &RunConfig) -> Result<HamiltonianFactory, CliError> {
    let p = &config.equation.params;
    let pot = build_potentials(config);
    let h = match config.equation.kind {
        EquationKind::Zero => Ok(HamiltonianFactory::zero(config.components(), p.hbar)),
        EquationKind::SchrodingerFree | EquationKind::Schrodinger => schrodinger_hamiltonian(p, &pot),
        EquationKind::DiracFree | EquationKind::Dirac => dirac_hamiltonian(p, &pot),
        EquationKind::KgCanonical => kg_canonical_hamiltonian(p, &pot),
        EquationKind::KgNonrel => kg_nonrel_hamiltonian(p, &pot),
        EquationKind::Kg5d => kg_5d_hamiltonian(p),
        EquationKind::Maxwell => maxwell_hamiltonian(p),
    };
    h.phase("hamiltonian")
}

/// Internal vector of the plane wave `e^{ikx}` on the selected branch: the
/// eigenvector of the `m×m` symbol with the largest (or smallest) real
/// eigenvalue.
fn branch_vector(h: &HamiltonianFactory, grid: &SpatialGrid1D, t: f64, k: f64, positive: bool) -> Result<DVector<C64>, CliError> {
    let m = h.dimension();
    let op = h.at(t, grid).phase("symbol")?;
    let n = grid.len() as f64;
    let wave = |beta: usize| GridFunction::from_fn(grid, m, |a, x| if a == beta { C64::new(0.0, k * x).exp() } else { C64::new(0.0, 0.0) });
    let mut symbol = DMatrix::<C64>::zeros(m, m);
    for b in 0..m {
        let hb = op.apply(&wave(b)).phase("symbol")?;
        for a in 0..m {
            let proj: C64 = wave(a).component(a).iter().zip(hb.component(a)).map(|(u, v)| u.conj() * v).sum();
            symbol[(a, b)] = proj / n;
        }
    }
    let eig = symbol.clone().schur().eigenvalues().ok_or_else(|| CliError::Numerical {
        phase: "symbol",
        source: relbundle_core::Error::NonFinite("symbol eigenvalues".into()),
    })?;
    let pick = eig
        .iter()
        .copied()
        .reduce(|a, b| if (b.re > a.re) == positive && b.re != a.re { b } else { a })
        .unwrap_or(C64::new(0.0, 0.0));
    let shifted = symbol - DMatrix::identity(m, m) * pick;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let (i, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    let mut v: DVector<C64> = vt.row(i).adjoint();
    // fix the phase so the largest entry is real and positive
    let (j, _) = v.iter().enumerate().fold((0, -1.0), |acc, (j, z)| if z.norm() > acc.1 + 1e-12 { (j, z.norm()) } else { acc });
    let phase = v[j].conj() / v[j].norm();
    v *= phase;
    Ok(v)
}

pub fn build_initial(config: &RunConfig, h: &HamiltonianFactory, grid: &SpatialGrid1D) -> Result<GridFunction, CliError> {
    let m = config.components();
    let t0 = config.time.start;
    let (profile, k, spinor): (Box<dyn Fn(f64) -> C64>, f64, Spinor) = match &config.initial {
        InitialSpec::Samples(v) => {
            let psi = GridFunction::from_values(grid, m, v.clone()).phase("initial state")?;
            return normalized(psi);
        }
        InitialSpec::PlaneWave { mode, spinor } => {
            let k = grid.wavenumber(*mode);
            (Box::new(move |x| C64::new(0.0, k * x).exp()), k, *spinor)
        }
        InitialSpec::Gaussian {
            width,
            center,
            wavenumber,
            spinor,
        } => {
            let (w, c, k) = (*width, *center, *wavenumber);
            (Box::new(move |x| C64::new(-(x - c).powi(2) / (2.0 * w * w), k * x).exp()), k, *spinor)
        }
    };
    let psi = if config.equation.kind == EquationKind::Kg5d && !matches!(spinor, Spinor::Component(_)) {
        // the five-component state is built from (φ, ∂φ/∂t) so that its
        // auxiliary components are consistent
        let p = &config.equation.params;
        let omega = ((p.c * k).powi(2) + (p.rest_energy() / p.hbar).powi(2)).sqrt();
        let omega = if spinor == Spinor::Positive { omega } else { -omega };
        let phi = GridFunction::from_fn(grid, 1, |_, x| profile(x));
        let phi_t = phi.scaled(C64::new(0.0, -omega));
        kg5d_state_from_scalar(p, &phi, &phi_t).phase("initial state")?
    } else {
        let u = match spinor {
            Spinor::Component(i) => DVector::from_fn(m, |a, _| C64::new(if a == i { 1.0 } else { 0.0 }, 0.0)),
            Spinor::Positive | Spinor::Negative => branch_vector(h, grid, t0, k, spinor == Spinor::Positive)?,
        };
        GridFunction::from_fn(grid, m, |a, x| profile(x) * u[a])
    };
    normalized(psi)
}

fn normalized(psi: GridFunction) -> Result<GridFunction, CliError> {
    let n = psi.norm();
    if !n.is_finite() {
        return Err(CliError::Numerical {
            phase: "initial state",
            source: relbundle_core::Error::NonFinite("initial state".into()),
        });
    }
    Ok(if n > 0.0 { psi.scaled(C64::new(1.0 / n, 0.0)) } else { psi })
}

pub fn build_trivialization(config: &RunConfig) -> Result<Trivialization, CliError> {
    let m = config.components();
    match config.trivialization {
        TrivializationSpec::Identity => Ok(Trivialization::identity(m)),
        TrivializationSpec::ConstantUnitary { angle } => {
            let mut u = DMatrix::<C64>::identity(m, m);
            if m == 1 {
                u[(0, 0)] = C64::new(0.0, angle).exp();
            } else {
                let (s, c) = angle.sin_cos();
                u[(0, 0)] = C64::new(c, 0.0);
                u[(0, 1)] = C64::new(-s, 0.0);
                u[(1, 0)] = C64::new(s, 0.0);
                u[(1, 1)] = C64::new(c, 0.0);
            }
            Trivialization::constant(u).phase("trivialization")
        }
        TrivializationSpec::PhaseField {
            rate,
            amplitude,
            wavenumber,
        } => Ok(Trivialization::phase_field(
            m,
            move |p| rate * p.t + amplitude * (wavenumber * p.x).sin(),
            move |p| (rate, amplitude * wavenumber * (wavenumber * p.x).cos()),
        )),
    }
}

fn observable(kind: ObservableKind, h: &HamiltonianFactory, grid: &SpatialGrid1D, t: f64) -> Result<Observable, CliError> {
    let m = h.dimension();
    Ok(match kind {
        ObservableKind::Position => {
            Observable::hermitian(MatrixOperator::diagonal(m, GridOperator::multiply_real(&grid.coordinates())))
        }
        ObservableKind::Momentum => Observable::hermitian(MatrixOperator::diagonal(
            m,
            GridOperator::derivative(1).scaled(C64::new(0.0, -h.hbar())),
        )),
        ObservableKind::Energy => Observable::new(h.at(t, grid).phase("observables")?, FibreProduct::Identity, false),
    })
}

/// `|‖l⁻¹ψ‖_l − ‖ψ‖|` with the product induced by the pointwise frames.
fn lifting_defect(l: &Trivialization, psi: &GridFunction, t: f64) -> Result<f64, CliError> {
    let grid = psi.grid();
    let mut frames = Vec::with_capacity(grid.len());
    let mut lifted = psi.clone();
    for (j, x) in grid.coordinates().into_iter().enumerate() {
        let p = BasePoint::new(t, x);
        let inv = l.inverse_at(p).phase("trivialization")?;
        let v = inv * DVector::from_vec(psi.point(j));
        lifted.set_point(j, v.as_slice());
        frames.push(l.at(p).phase("trivialization")?);
    }
    let fibre = FibreProduct::induced(&frames).phase("trivialization")?;
    let n = inner(&lifted, &lifted, &fibre).phase("trivialization")?.re.max(0.0).sqrt();
    Ok((n - psi.norm()).abs())
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, contents).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    Ok(path)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))
}

/// Evolves the configured state and writes `report.csv`, `state.csv` (unless
/// disabled) and `summary.txt` into `out`.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    let mut timings = Vec::new();
    let clock = Instant::now();
    let grid = build_grid(config)?;
    let h = build_hamiltonian(config)?;
    let psi0 = build_initial(config, &h, &grid)?;
    let l = build_trivialization(config)?;
    let tm = &config.time;
    let problem = EvolutionProblem::new(h.clone(), grid.clone(), tm.start, tm.end, tm.step, tm.scheme).phase("setup")?;
    timings.push(("setup", clock.elapsed()));

    let clock = Instant::now();
    let traj = problem.trajectory(&psi0, tm.start, tm.end, config.output.every).phase("evolution")?;
    timings.push(("evolution", clock.elapsed()));

    let clock = Instant::now();
    let observable_names: Vec<String> = config.output.observables.iter().map(|k| k.label().to_string()).collect();
    let mut residual_names = vec!["norm-deviation".to_string()];
    let kg = config.equation.kind == EquationKind::KgCanonical;
    if kg {
        residual_names.push("charge-deviation".into());
    }
    let lifted = config.trivialization != TrivializationSpec::Identity;
    if lifted {
        residual_names.push("lifting-defect".into());
    }
    let n0 = psi0.norm();
    let q0 = if kg { kg_charge(&psi0).phase("observables")? } else { 0.0 };
    let mut rows = Vec::with_capacity(traj.len());
    for (i, psi) in traj.snapshots().iter().enumerate() {
        let t = traj.time(i);
        let mut observables = Vec::new();
        for kind in &config.output.observables {
            let obs = observable(*kind, &h, &grid, t)?;
            observables.push(if psi.norm() > 0.0 { expectation(&obs, psi).phase("observables")?.re } else { 0.0 });
        }
        let norm = psi.norm();
        let mut residuals = vec![(norm - n0).abs()];
        if kg {
            residuals.push((kg_charge(psi).phase("observables")? - q0).abs());
        }
        if lifted {
            residuals.push(lifting_defect(&l, psi, t)?);
        }
        rows.push(ReportRow {
            t,
            norm,
            observables,
            residuals,
        });
    }
    let frequency = if traj.len() >= 2 { traj.frequency(&psi0).ok() } else { None };
    timings.push(("analysis", clock.elapsed()));

    let mut report = RunReport {
        observable_names,
        residual_names,
        rows,
        frequency,
        timings,
        files: Vec::new(),
    };
    ensure_dir(out)?;
    report.files.push(write(out.join("report.csv"), &report.to_csv())?);
    if config.output.state {
        report.files.push(write(out.join("state.csv"), &state_csv(&traj))?);
    }
    report.files.push(write(out.join("summary.txt"), &report.summary())?);
    Ok(report)
}

/// Rows `t,x,component,re,im` for every snapshot.
pub fn state_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,x,component,re,im\n");
    for (i, psi) in traj.snapshots().iter().enumerate() {
        let t = num(traj.time(i));
        let xs = psi.grid().coordinates();
        for a in 0..psi.components() {
            for (x, z) in xs.iter().zip(psi.component(a)) {
                let _ = writeln!(s, "{t},{},{a},{},{}", num(*x), num(z.re), num(z.im));
            }
        }
    }
    s
}

/// Outcome of the `green` subcommand.
#[derive(Clone, Debug)]
pub struct GreenReport {
    pub kernel: GreenKernel,
    /// `max |ψ_green − ψ_evolved|` for the configured initial state.
    pub duality_residual: f64,
    pub tolerance: f64,
    pub files: Vec<PathBuf>,
}

/// Builds the retarded kernel between `time.start` and `time.end`, checks it
/// against exact evolution of the configured initial state and writes
/// `kernel.csv`.
pub fn green(config: &RunConfig, out: &Path, tolerance_scale: f64) -> Result<GreenReport, CliError> {
    let grid = build_grid(config)?;
    let h = build_hamiltonian(config)?;
    let tm = &config.time;
    let (tp, t) = (tm.end, tm.start);
    if tp <= t {
        return Err(ConfigError::new(0, 0, "green needs time.end > time.start").into());
    }
    let psi0 = build_initial(config, &h, &grid)?;
    let exact = EvolutionProblem::new(h.clone(), grid.clone(), t, tp, tm.step, Scheme::MidpointExponential)
        .phase("green reference")?
        .evolve(&psi0, t, tp)
        .phase("green reference")?;
    let (kernel, via, reference, tolerance) = match config.equation.kind {
        EquationKind::SchrodingerFree | EquationKind::Schrodinger | EquationKind::DiracFree | EquationKind::Dirac => {
            let basis = eigenbasis(&h, &grid).phase("eigenbasis")?;
            let kernel = if config.components() == 4 {
                retarded_green_dirac(&basis, tp, t).phase("green kernel")?
            } else {
                retarded_green_schrodinger(&basis, tp, t)
            };
            let via = propagate_via_green(&kernel, &psi0).phase("green propagation")?;
            (kernel, via, exact, 1e-8)
        }
        EquationKind::KgCanonical => {
            let p = &config.equation.params;
            let delta = 1e-5 * (tp - t).min(1.0);
            let slices = kg_scalar_slices(&h, &grid, p.c, tp, t, delta).phase("green kernel")?;
            let kernel = kg_green_vector(&slices, p, &build_potentials(config)).phase("green kernel")?;
            let via = propagate_via_green(&kernel, &psi0).phase("green propagation")?;
            (kernel, via, exact.slice_components(0, 1).phase("green reference")?, 1e-6)
        }
        other => {
            return Err(ConfigError::new(
                0,
                0,
                format!("green kernels exist for schrodinger, dirac and kg-canonical, not `{}`", other.label()),
            )
            .into())
        }
    };
    let duality_residual = via.max_abs_diff(&reference).phase("green propagation")?;
    ensure_dir(out)?;
    let mut csv = Vec::new();
    kernel.write_csv(&mut csv).map_err(|e| CliError::io("formatting kernel", e))?;
    let path = out.join("kernel.csv");
    fs::write(&path, csv).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    Ok(GreenReport {
        kernel,
        duality_residual,
        tolerance: tolerance * tolerance_scale,
        files: vec![path],
    })
}

/// Dumps `H(t₀)`: operator kinds per component block in `structure.txt` and
/// the nonzero entries of the dense matrix in `hamiltonian.csv`.
pub fn reduce(config: &RunConfig, out: &Path) -> Result<(String, Vec<PathBuf>), CliError> {
    let grid = build_grid(config)?;
    let h = build_hamiltonian(config)?;
    let t0 = config.time.start;
    let op = h.at(t0, &grid).phase("reduce")?;
    let m = op.dimension();
    let mut structure = String::new();
    let _ = writeln!(structure, "equation = {}", config.equation.kind.label());
    let _ = writeln!(structure, "kind = {}", h.kind());
    let _ = writeln!(structure, "components = {m}");
    let _ = writeln!(structure, "time-independent = {}", h.is_time_independent());
    for a in 0..m {
        let row: Vec<String> = (0..m).map(|b| format!("{:?}", op.entry(a, b).kind())).collect();
        let _ = writeln!(structure, "row {a} = {}", row.join(", "));
    }
    ensure_dir(out)?;
    let mut files = vec![write(out.join("structure.txt"), &structure)?];
    let d = m * grid.len();
    if d <= DENSE_LIMIT {
        let dense = op.to_dense(&grid).phase("reduce")?;
        let mut csv = String::from("row,col,re,im\n");
        for r in 0..d {
            for c in 0..d {
                let v = dense[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    let _ = writeln!(csv, "{r},{c},{},{}", num(v.re), num(v.im));
                }
            }
        }
        files.push(write(out.join("hamiltonian.csv"), &csv)?);
    }
    Ok((structure, files))
}
