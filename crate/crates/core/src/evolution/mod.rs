//! Time stepping of `iħ ∂ψ/∂t = H(t)ψ`, evolution operators and mean values.

mod observable;
mod solver;
mod trajectory;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, SpatialGrid1D};
use crate::reduction::HamiltonianFactory;
use crate::C64;

pub use observable::{expectation, Observable};
pub use trajectory::Trajectory;

/// Largest flattened state dimension `m·N` for which dense matrices are built.
pub const DENSE_LIMIT: usize = 1024;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Scheme {
    #[default]
    CrankNicolson,
    MidpointExponential,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::CrankNicolson => "crank-nicolson",
            Scheme::MidpointExponential => "midpoint-exponential",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crank-nicolson" => Ok(Scheme::CrankNicolson),
            "midpoint-exponential" => Ok(Scheme::MidpointExponential),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme {other:?} (expected crank-nicolson or midpoint-exponential)"
            ))),
        }
    }
}

/// A Hamiltonian, a grid and a uniform time lattice `t₀ + k·dt`.
pub struct EvolutionProblem {
    factory: HamiltonianFactory,
    grid: SpatialGrid1D,
    t0: f64,
    t1: f64,
    dt: f64,
    scheme: Scheme,
    cached_step: OnceLock<DMatrix<C64>>,
}

impl fmt::Debug for EvolutionProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvolutionProblem")
            .field("factory", &self.factory)
            .field("grid", &self.grid)
            .field("t0", &self.t0)
            .field("t1", &self.t1)
            .field("dt", &self.dt)
            .field("scheme", &self.scheme)
            .finish()
    }
}

impl Clone for EvolutionProblem {
    fn clone(&self) -> Self {
        Self {
            factory: self.factory.clone(),
            grid: self.grid.clone(),
            t0: self.t0,
            t1: self.t1,
            dt: self.dt,
            scheme: self.scheme,
            cached_step: self.cached_step.clone(),
        }
    }
}


impl EvolutionProblem {
    pub fn new(
        factory: HamiltonianFactory,
        grid: SpatialGrid1D,
        t0: f64,
        t1: f64,
        dt: f64,
        scheme: Scheme,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
            return Err(Error::InvalidParameter(format!("need t0 <= t1, got [{t0}, {t1}]")));
        }
        Ok(Self {
            factory,
            grid,
            t0,
            t1,
            dt,
            scheme,
            cached_step: OnceLock::new(),
        })
    }

    pub fn factory(&self) -> &HamiltonianFactory {
        &self.factory
    }

    pub fn grid(&self) -> &SpatialGrid1D {
        &self.grid
    }

    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t1
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn components(&self) -> usize {
        self.factory.dimension()
    }

    /// Flattened state dimension `m·N`.
    pub fn state_dimension(&self) -> usize {
        self.components() * self.grid.len()
    }

    pub fn is_dense(&self) -> bool {
        self.state_dimension() <= DENSE_LIMIT
    }

    /// Lattice time `t₀ + k·dt`.
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// Index `k` with `t = t₀ + k·dt`.
    pub fn lattice_index(&self, t: f64) -> Result<usize> {
        let off = || Error::OffLattice {
            time: t,
            start: self.t0,
            step: self.dt,
        };
        let k = (t - self.t0) / self.dt;
        let r = k.round();
        if !k.is_finite() || r < 0.0 || (k - r).abs() > 1e-9 * r.max(1.0) {
            return Err(off());
        }
        Ok(r as usize)
    }

    fn check_state(&self, psi: &GridFunction) -> Result<()> {
        self.grid.check_same(psi.grid())?;
        if psi.components() != self.components() {
            return Err(Error::ComponentMismatch {
                expected: self.components(),
                found: psi.components(),
            });
        }
        Ok(())
    }

    fn dense_guard(&self) -> Result<()> {
        if self.is_dense() {
            Ok(())
        } else {
            Err(Error::TooLarge {
                dimension: self.state_dimension(),
                limit: DENSE_LIMIT,
            })
        }
    }

    /// Dense one-step propagator from `t` to `t + dt` with `H(t + dt/2)`.
    pub fn step_matrix(&self, t: f64) -> Result<DMatrix<C64>> {
        self.dense_guard()?;
        if self.factory.is_time_independent() {
            if let Some(s) = self.cached_step.get() {
                return Ok(s.clone());
            }
            let s = self.build_step_matrix(t)?;
            return Ok(self.cached_step.get_or_init(|| s).clone());
        }
        self.build_step_matrix(t)
    }

    fn build_step_matrix(&self, t: f64) -> Result<DMatrix<C64>> {
        let h = self.factory.dense(t + 0.5 * self.dt, &self.grid)?;
        let d = h.nrows();
        match self.scheme {
            Scheme::CrankNicolson => {
                let a = C64::new(0.0, 0.5 * self.dt / self.factory.hbar());
                let lhs = DMatrix::identity(d, d) + &h * a;
                let rhs = DMatrix::identity(d, d) - &h * a;
                lhs.clone().lu().solve(&rhs).ok_or_else(|| Error::LinearSolve {
                    time: t,
                    condition: condition_estimate(&lhs),
                })
            }
            Scheme::MidpointExponential => {
                let a = C64::new(0.0, -self.dt / self.factory.hbar());
                Ok((h * a).exp())
            }
        }
    }

    fn step_vector(&self, v: &DVector<C64>, t: f64) -> Result<DVector<C64>> {
        if self.is_dense() {
            if self.factory.is_time_independent() || self.scheme == Scheme::MidpointExponential {
                return Ok(self.step_matrix(t)? * v);
            }
            let h = self.factory.dense(t + 0.5 * self.dt, &self.grid)?;
            let d = h.nrows();
            let a = C64::new(0.0, 0.5 * self.dt / self.factory.hbar());
            let lhs = DMatrix::identity(d, d) + &h * a;
            let rhs = v - (&h * v) * a;
            return lhs.clone().lu().solve(&rhs).ok_or_else(|| Error::LinearSolve {
                time: t,
                condition: condition_estimate(&lhs),
            });
        }
        if self.scheme == Scheme::MidpointExponential {
            return Err(Error::TooLarge {
                dimension: self.state_dimension(),
                limit: DENSE_LIMIT,
            });
        }
        self.matrix_free_step(v, t)
    }

    fn matrix_free_step(&self, v: &DVector<C64>, t: f64) -> Result<DVector<C64>> {
        let op = self.factory.at(t + 0.5 * self.dt, &self.grid)?;
        let m = self.components();
        let a = C64::new(0.0, 0.5 * self.dt / self.factory.hbar());
        let h_apply = |x: &[C64]| -> Result<Vec<C64>> {
            let f = GridFunction::from_values(&self.grid, m, x.to_vec())?;
            Ok(op.apply(&f)?.into_values())
        };
        let hv = h_apply(v.as_slice())?;
        let rhs: Vec<C64> = v.iter().zip(&hv).map(|(x, y)| x - a * y).collect();
        let out = solver::bicgstab(
            |x: &[C64]| -> Result<Vec<C64>> {
                let hx = h_apply(x)?;
                Ok(x.iter().zip(&hx).map(|(u, w)| u + a * w).collect())
            },
            &rhs,
            v.as_slice().to_vec(),
            1e-13,
            2000,
        )?;
        if !out.converged {
            return Err(Error::NoConvergence {
                time: t,
                residual: out.residual,
            });
        }
        Ok(DVector::from_vec(out.solution))
    }

    /// One step from `t` to `t + dt`.
    pub fn step(&self, psi: &GridFunction, t: f64) -> Result<GridFunction> {
        self.check_state(psi)?;
        let out = self.step_vector(&psi.to_vector(), t)?;
        if out.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(format!("state after step at t = {t}")));
        }
        GridFunction::from_vector(&self.grid, self.components(), &out)
    }

    /// Evolves `psi` from lattice time `from` to lattice time `to ≥ from`.
    pub fn evolve(&self, psi: &GridFunction, from: f64, to: f64) -> Result<GridFunction> {
        self.check_state(psi)?;
        let (a, b) = (self.lattice_index(from)?, self.lattice_index(to)?);
        if b < a {
            return Err(Error::InvalidParameter(format!("cannot evolve backwards from {from} to {to}")));
        }
        let mut v = psi.to_vector();
        for k in a..b {
            v = self.step_vector(&v, self.time(k))?;
        }
        GridFunction::from_vector(&self.grid, self.components(), &v)
    }

    /// Snapshots every `every` steps from `from` to `to` (both included).
    pub fn trajectory(&self, psi: &GridFunction, from: f64, to: f64, every: usize) -> Result<Trajectory> {
        self.check_state(psi)?;
        if every == 0 {
            return Err(Error::InvalidParameter("snapshot cadence must be positive".into()));
        }
        let (a, b) = (self.lattice_index(from)?, self.lattice_index(to)?);
        if b < a {
            return Err(Error::InvalidParameter(format!("cannot evolve backwards from {from} to {to}")));
        }
        let mut v = psi.to_vector();
        let mut snaps = vec![psi.clone()];
        for k in a..b {
            v = self.step_vector(&v, self.time(k))?;
            if (k + 1 - a) % every == 0 {
                snaps.push(GridFunction::from_vector(&self.grid, self.components(), &v)?);
            }
        }
        Trajectory::new(self.time(a), every as f64 * self.dt, snaps)
    }

    /// Dense `U(t, s)` for lattice times; `t < s` gives the inverse of `U(s, t)`.
    pub fn evolution_operator(&self, t: f64, s: f64) -> Result<EvolutionOperator> {
        self.dense_guard()?;
        let (kt, ks) = (self.lattice_index(t)?, self.lattice_index(s)?);
        let d = self.state_dimension();
        let build = |from: usize, to: usize| -> Result<DMatrix<C64>> {
            if self.factory.is_time_independent() {
                Ok(matrix_power(&self.step_matrix(self.time(from))?, to - from))
            } else {
                let mut u = DMatrix::identity(d, d);
                for k in from..to {
                    u = self.step_matrix(self.time(k))? * u;
                }
                Ok(u)
            }
        };
        let matrix = if kt >= ks {
            build(ks, kt)?
        } else {
            build(kt, ks)?.try_inverse().ok_or_else(|| Error::Singular {
                context: format!("evolution operator U({s}, {t})"),
            })?
        };
        Ok(EvolutionOperator {
            t,
            s,
            grid: self.grid.clone(),
            components: self.components(),
            matrix,
        })
    }
}

fn matrix_power(m: &DMatrix<C64>, mut n: usize) -> DMatrix<C64> {
    let d = m.nrows();
    let mut result = DMatrix::identity(d, d);
    let mut base = m.clone();
    let mut first = true;
    while n > 0 {
        if n & 1 == 1 {
            result = if first { base.clone() } else { &base * result };
            first = false;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

fn condition_estimate(m: &DMatrix<C64>) -> f64 {
    let sv = m.clone().singular_values();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / min
    }
}

/// Dense `U(t, s)` on the flattened state space.
#[derive(Clone, Debug)]
pub struct EvolutionOperator {
    t: f64,
    s: f64,
    grid: SpatialGrid1D,
    components: usize,
    matrix: DMatrix<C64>,
}

impl EvolutionOperator {
    pub fn identity(grid: &SpatialGrid1D, components: usize, t: f64) -> Self {
        let d = components * grid.len();
        Self {
            t,
            s: t,
            grid: grid.clone(),
            components,
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn from_matrix(grid: &SpatialGrid1D, components: usize, t: f64, s: f64, matrix: DMatrix<C64>) -> Result<Self> {
        let d = components * grid.len();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self {
            t,
            s,
            grid: grid.clone(),
            components,
            matrix,
        })
    }

    /// `(t, s)`.
    pub fn times(&self) -> (f64, f64) {
        (self.t, self.s)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn grid(&self) -> &SpatialGrid1D {
        &self.grid
    }

    pub fn apply(&self, psi: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(psi.grid())?;
        if psi.components() != self.components {
            return Err(Error::ComponentMismatch {
                expected: self.components,
                found: psi.components(),
            });
        }
        GridFunction::from_vector(&self.grid, self.components, &(&self.matrix * psi.to_vector()))
    }

    /// `U(t₂, t₁)·U(t₁, t₀)` where `self = U(t₂, t₁)` and `earlier = U(t₁, t₀)`.
    pub fn compose(&self, earlier: &EvolutionOperator) -> Result<EvolutionOperator> {
        if (self.s - earlier.t).abs() > 1e-12 * self.s.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "cannot compose U({}, {}) after U({}, {})",
                self.t, self.s, earlier.t, earlier.s
            )));
        }
        self.grid.check_same(&earlier.grid)?;
        Ok(EvolutionOperator {
            t: self.t,
            s: earlier.s,
            grid: self.grid.clone(),
            components: self.components,
            matrix: &self.matrix * &earlier.matrix,
        })
    }

    /// `max |U†U − Id|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.matrix.nrows();
        let g = self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(d, d);
        g.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |self − other|`.
    pub fn max_abs_diff(&self, other: &EvolutionOperator) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
