//! First-order (Schrödinger-type) forms of relativistic wave equations:
//! physical parameters, external potentials and Hamiltonian factories.

mod companion;
mod gauge;
mod hamiltonians;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebra::MatrixOperator;
use crate::error::{Error, Result};
use crate::grid::SpatialGrid1D;
use crate::C64;

pub use companion::{companion_hamiltonian, CoefficientFn, LinearTimeSystem};
pub use gauge::{gauge_transform, kg_nonrel_frame, GaugeFrame};
pub use hamiltonians::{
    block_diag_hamiltonian, dirac_hamiltonian, dirac_symbol, kg5d_covariant_residual,
    kg5d_state_from_scalar, kg_canonical_hamiltonian, kg_charge, kg_nonrel_hamiltonian,
    kg_5d_hamiltonian, maxwell_energy, maxwell_hamiltonian, schrodinger_hamiltonian,
};

/// Mass, charge and the two unit constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    pub mass: f64,
    pub charge: f64,
    pub hbar: f64,
    pub c: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            charge: 1.0,
            hbar: 1.0,
            c: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn new(mass: f64, charge: f64, hbar: f64, c: f64) -> Result<Self> {
        let p = Self { mass, charge, hbar, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mass", self.mass), ("charge", self.charge), ("hbar", self.hbar), ("c", self.c)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if self.mass < 0.0 {
            return Err(Error::InvalidParameter(format!("mass must be nonnegative, got {}", self.mass)));
        }
        if self.hbar <= 0.0 || self.c <= 0.0 {
            return Err(Error::InvalidParameter("hbar and c must be positive".into()));
        }
        Ok(())
    }

    /// Rest energy `mc²`.
    pub fn rest_energy(&self) -> f64 {
        self.mass * self.c * self.c
    }
}

type StaticFn = dyn Fn(f64) -> f64 + Send + Sync;
type DynamicFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Real scalar field on spacetime, sampled on demand.
#[derive(Clone, Default)]
pub enum ScalarField {
    #[default]
    Zero,
    Constant(f64),
    /// Samples on the run grid, constant in time.
    Samples(Arc<[f64]>),
    /// `f(x)`, constant in time.
    Static(Arc<StaticFn>),
    /// `f(t, x)`.
    Dynamic(Arc<DynamicFn>),
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Zero => write!(f, "Zero"),
            ScalarField::Constant(v) => write!(f, "Constant({v})"),
            ScalarField::Samples(s) => write!(f, "Samples(len = {})", s.len()),
            ScalarField::Static(_) => write!(f, "Static(<fn>)"),
            ScalarField::Dynamic(_) => write!(f, "Dynamic(<fn>)"),
        }
    }
}

impl ScalarField {
    pub fn samples(values: Vec<f64>) -> Self {
        ScalarField::Samples(values.into())
    }

    pub fn from_static(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Static(Arc::new(f))
    }

    pub fn from_dynamic(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Dynamic(Arc::new(f))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ScalarField::Zero => true,
            ScalarField::Constant(v) => *v == 0.0,
            ScalarField::Samples(s) => s.iter().all(|v| *v == 0.0),
            _ => false,
        }
    }

    pub fn is_static(&self) -> bool {
        !matches!(self, ScalarField::Dynamic(_))
    }

    pub fn sample(&self, t: f64, grid: &SpatialGrid1D) -> Result<Vec<f64>> {
        let xs = grid.coordinates();
        let out: Vec<f64> = match self {
            ScalarField::Zero => vec![0.0; xs.len()],
            ScalarField::Constant(v) => vec![*v; xs.len()],
            ScalarField::Samples(s) => {
                if s.len() != xs.len() {
                    return Err(Error::DimensionMismatch {
                        expected: xs.len(),
                        found: s.len(),
                    });
                }
                s.to_vec()
            }
            ScalarField::Static(f) => xs.iter().map(|&x| f(x)).collect(),
            ScalarField::Dynamic(f) => xs.iter().map(|&x| f(t, x)).collect(),
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("potential samples at t = {t}")));
        }
        Ok(out)
    }

    /// `∂f/∂t` on the grid; central difference for time-dependent fields.
    pub fn time_derivative(&self, t: f64, grid: &SpatialGrid1D) -> Result<Vec<f64>> {
        match self {
            ScalarField::Dynamic(f) => {
                let dt = 1e-6 * t.abs().max(1.0);
                Ok(grid
                    .coordinates()
                    .iter()
                    .map(|&x| (f(t + dt, x) - f(t - dt, x)) / (2.0 * dt))
                    .collect())
            }
            _ => Ok(vec![0.0; grid.len()]),
        }
    }
}

/// Scalar potential `φ` and the x-component of the vector potential `A`
/// (the other two components vanish in the 1D reduction).
#[derive(Clone, Debug, Default)]
pub struct Potentials {
    pub scalar: ScalarField,
    pub vector: ScalarField,
}

impl Potentials {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(scalar: ScalarField, vector: ScalarField) -> Self {
        Self { scalar, vector }
    }

    pub fn is_zero(&self) -> bool {
        self.scalar.is_zero() && self.vector.is_zero()
    }

    pub fn is_static(&self) -> bool {
        self.scalar.is_static() && self.vector.is_static()
    }

    /// Covariant components `A_μ = (φ, −A_x, 0, 0)` at each grid point.
    pub fn covariant(&self, t: f64, grid: &SpatialGrid1D) -> Result<Vec<[f64; 4]>> {
        let phi = self.scalar.sample(t, grid)?;
        let ax = self.vector.sample(t, grid)?;
        Ok(phi.into_iter().zip(ax).map(|(p, a)| [p, -a, 0.0, 0.0]).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HamiltonianKind {
    SchrodingerFree,
    Schrodinger,
    Dirac,
    KgCanonical,
    KgNonrel,
    Kg5d,
    Maxwell,
    Companion,
    BlockDiag,
    Gauge,
    Constant,
}

impl HamiltonianKind {
    pub fn label(&self) -> &'static str {
        match self {
            HamiltonianKind::SchrodingerFree => "schrodinger-free",
            HamiltonianKind::Schrodinger => "schrodinger",
            HamiltonianKind::Dirac => "dirac",
            HamiltonianKind::KgCanonical => "kg-canonical",
            HamiltonianKind::KgNonrel => "kg-nonrel",
            HamiltonianKind::Kg5d => "kg-5d",
            HamiltonianKind::Maxwell => "maxwell",
            HamiltonianKind::Companion => "companion",
            HamiltonianKind::BlockDiag => "block-diag",
            HamiltonianKind::Gauge => "gauge",
            HamiltonianKind::Constant => "constant",
        }
    }
}

impl fmt::Display for HamiltonianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub type HamiltonianFn = dyn Fn(f64, &SpatialGrid1D) -> Result<MatrixOperator> + Send + Sync;

/// Produces `H(t)` as a matrix operator on a given grid.
#[derive(Clone)]
pub struct HamiltonianFactory {
    kind: HamiltonianKind,
    dimension: usize,
    hbar: f64,
    time_independent: bool,
    build: Arc<HamiltonianFn>,
}

impl fmt::Debug for HamiltonianFactory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianFactory")
            .field("kind", &self.kind)
            .field("dimension", &self.dimension)
            .field("hbar", &self.hbar)
            .field("time_independent", &self.time_independent)
            .finish()
    }
}

impl HamiltonianFactory {
    pub fn new(
        kind: HamiltonianKind,
        dimension: usize,
        hbar: f64,
        time_independent: bool,
        build: impl Fn(f64, &SpatialGrid1D) -> Result<MatrixOperator> + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind,
            dimension,
            hbar,
            time_independent,
            build: Arc::new(build),
        }
    }

    /// `H ≡ 0`.
    pub fn zero(dimension: usize, hbar: f64) -> Self {
        Self::new(HamiltonianKind::Constant, dimension, hbar, true, move |_, _| {
            Ok(MatrixOperator::zero(dimension))
        })
    }

    /// Constant matrix acting on the components at every point.
    pub fn constant(matrix: DMatrix<C64>, hbar: f64) -> Result<Self> {
        let op = MatrixOperator::from_constant(&matrix)?;
        Ok(Self::new(HamiltonianKind::Constant, matrix.nrows(), hbar, true, move |_, _| Ok(op.clone())))
    }

    /// Fixed matrix operator.
    pub fn fixed(kind: HamiltonianKind, op: MatrixOperator, hbar: f64) -> Self {
        Self::new(kind, op.dimension(), hbar, true, move |_, _| Ok(op.clone()))
    }

    pub fn kind(&self) -> HamiltonianKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn is_time_independent(&self) -> bool {
        self.time_independent
    }

    /// `H(t)` on `grid`.
    pub fn at(&self, t: f64, grid: &SpatialGrid1D) -> Result<MatrixOperator> {
        let op = (self.build)(t, grid)?;
        if op.dimension() != self.dimension {
            return Err(Error::ComponentMismatch {
                expected: self.dimension,
                found: op.dimension(),
            });
        }
        Ok(op)
    }

    /// Dense matrix of `H(t)` on the flattened state space.
    pub fn dense(&self, t: f64, grid: &SpatialGrid1D) -> Result<DMatrix<C64>> {
        self.at(t, grid)?.to_dense(grid)
    }

    /// `max |H − H†|` of the dense matrix, relative to `max |H|` when that exceeds one.
    pub fn hermiticity_defect(&self, t: f64, grid: &SpatialGrid1D) -> Result<f64> {
        let h = self.dense(t, grid)?;
        let scale = h.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let defect = (&h - h.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(defect / scale)
    }
}
