//! The bundle picture: trivializations `l_x`, transports along paths and
//! along the identity map, their coefficients and derivations, and the
//! bundle Diracian.

mod diracian;
mod flat;
mod transport;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{FibreProduct, SpatialGrid1D};
use crate::C64;

pub use diracian::{bundle_diracian, BundleDiracian};
pub use flat::{flat_transport, section_derivation_residual, transported_section, FlatTransport};
pub use transport::{
    bundle_hamiltonian, derivation_along_path, evolution_transport, matrix_bundle_hamiltonian,
    transport_coefficients, transport_from_frames, DerivationMode, Lifting, Stencil, TransportAlongMap,
    TransportCoefficients, TransportGenerator,
};

/// A spacetime point `(t, x)` of the 1+1 dimensional base.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasePoint {
    pub t: f64,
    pub x: f64,
}

impl BasePoint {
    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }
}

/// Coordinate direction on the base.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    T,
    X,
}

pub type FibreMap = dyn Fn(BasePoint) -> DMatrix<C64> + Send + Sync;

const FD_STEP: f64 = 1e-3;

/// The family of fibre isomorphisms `l_p`, one invertible matrix per base point.
#[derive(Clone)]
pub struct Trivialization {
    dimension: usize,
    map: Arc<FibreMap>,
    derivatives: Option<[Arc<FibreMap>; 2]>,
    unitary: bool,
}

impl fmt::Debug for Trivialization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trivialization")
            .field("dimension", &self.dimension)
            .field("analytic_derivatives", &self.derivatives.is_some())
            .field("unitary", &self.unitary)
            .finish()
    }
}

impl Trivialization {
    pub fn from_fn(dimension: usize, map: impl Fn(BasePoint) -> DMatrix<C64> + Send + Sync + 'static) -> Self {
        Self {
            dimension,
            map: Arc::new(map),
            derivatives: None,
            unitary: false,
        }
    }

    pub fn identity(dimension: usize) -> Self {
        let zero = move |_: BasePoint| DMatrix::zeros(dimension, dimension);
        Self {
            dimension,
            map: Arc::new(move |_| DMatrix::identity(dimension, dimension)),
            derivatives: Some([Arc::new(zero), Arc::new(zero)]),
            unitary: true,
        }
    }

    /// The same matrix at every point.
    pub fn constant(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidParameter("trivialization matrix must be square".into()));
        }
        if matrix.clone().try_inverse().is_none() {
            return Err(Error::Singular {
                context: "constant trivialization".into(),
            });
        }
        let d = matrix.nrows();
        let unitary = unitarity(&matrix) <= 1e-12;
        let zero = move |_: BasePoint| DMatrix::zeros(d, d);
        Ok(Self {
            dimension: d,
            map: Arc::new(move |_| matrix.clone()),
            derivatives: Some([Arc::new(zero), Arc::new(zero)]),
            unitary,
        })
    }

    /// `l_p = diag(e^{iθ(p)}, 1, …, 1)` with the gradient `(∂_tθ, ∂_xθ)` supplied.
    pub fn phase_field(
        dimension: usize,
        theta: impl Fn(BasePoint) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(BasePoint) -> (f64, f64) + Send + Sync + 'static,
    ) -> Self {
        let theta = Arc::new(theta);
        let gradient = Arc::new(gradient);
        let phase = {
            let theta = theta.clone();
            move |p: BasePoint| {
                let mut m = DMatrix::identity(dimension, dimension);
                m[(0, 0)] = C64::new(0.0, theta(p)).exp();
                m
            }
        };
        let along = |axis: Axis| -> Arc<FibreMap> {
            let theta = theta.clone();
            let gradient = gradient.clone();
            Arc::new(move |p: BasePoint| {
                let (gt, gx) = gradient(p);
                let g = if axis == Axis::T { gt } else { gx };
                let mut m = DMatrix::zeros(dimension, dimension);
                m[(0, 0)] = C64::new(0.0, g) * C64::new(0.0, theta(p)).exp();
                m
            })
        };
        Self {
            dimension,
            map: Arc::new(phase),
            derivatives: Some([along(Axis::T), along(Axis::X)]),
            unitary: true,
        }
    }

    /// Attaches analytic `∂l/∂t` and `∂l/∂x`.
    pub fn with_derivatives(
        mut self,
        dt: impl Fn(BasePoint) -> DMatrix<C64> + Send + Sync + 'static,
        dx: impl Fn(BasePoint) -> DMatrix<C64> + Send + Sync + 'static,
    ) -> Self {
        self.derivatives = Some([Arc::new(dt), Arc::new(dx)]);
        self
    }

    /// Marks the family as unitary; see [`Trivialization::unitarity_defect`].
    pub fn with_unitary(mut self, unitary: bool) -> Self {
        self.unitary = unitary;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.derivatives.is_some()
    }

    pub fn at(&self, p: BasePoint) -> Result<DMatrix<C64>> {
        let m = (self.map)(p);
        if m.nrows() != self.dimension || m.ncols() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: m.nrows().max(m.ncols()),
            });
        }
        if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(format!("trivialization at (t = {}, x = {})", p.t, p.x)));
        }
        Ok(m)
    }

    pub fn inverse_at(&self, p: BasePoint) -> Result<DMatrix<C64>> {
        let m = self.at(p)?;
        if self.unitary {
            return Ok(m.adjoint());
        }
        m.try_inverse().ok_or_else(|| Error::Singular {
            context: format!("trivialization at (t = {}, x = {})", p.t, p.x),
        })
    }

    /// `∂l/∂t` or `∂l/∂x`; five-point central differences when no analytic
    /// derivative is attached.
    pub fn derivative(&self, p: BasePoint, axis: Axis) -> Result<DMatrix<C64>> {
        if let Some(d) = &self.derivatives {
            let i = if axis == Axis::T { 0 } else { 1 };
            return Ok(d[i](p));
        }
        let shift = |s: f64| match axis {
            Axis::T => BasePoint::new(p.t + s * FD_STEP, p.x),
            Axis::X => BasePoint::new(p.t, p.x + s * FD_STEP),
        };
        let w = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
        let mut acc = DMatrix::zeros(self.dimension, self.dimension);
        for (s, c) in w {
            acc += self.at(shift(s))? * C64::new(c / (12.0 * FD_STEP), 0.0);
        }
        Ok(acc)
    }

    /// `max |l†l − Id|` at `p`.
    pub fn unitarity_defect(&self, p: BasePoint) -> Result<f64> {
        Ok(unitarity(&self.at(p)?))
    }

    /// Fibre product `⟨u|v⟩_x = ⟨l_x u|l_x v⟩` over the grid points at time `t`.
    pub fn fibre_product(&self, grid: &SpatialGrid1D, t: f64) -> Result<FibreProduct> {
        if self.unitary {
            return Ok(FibreProduct::Identity);
        }
        let frames = grid
            .coordinates()
            .into_iter()
            .map(|x| self.at(BasePoint::new(t, x)))
            .collect::<Result<Vec<_>>>()?;
        FibreProduct::induced(&frames)
    }

    /// Lifts an `m`-dimensional family to the flattened state space of `grid`:
    /// at the observer point `(t, x)` the block of grid point `j` is
    /// `l(t, x_j − x)`.
    pub fn over_grid(&self, grid: &SpatialGrid1D) -> Trivialization {
        let m = self.dimension;
        let xs = grid.coordinates();
        let n = xs.len();
        let assemble = move |blocks: &dyn Fn(BasePoint) -> DMatrix<C64>, p: BasePoint, sign: f64| {
            let mut big = DMatrix::zeros(m * n, m * n);
            for (j, &xj) in xs.iter().enumerate() {
                let b = blocks(BasePoint::new(p.t, xj - p.x)) * C64::new(sign, 0.0);
                for a in 0..m {
                    for c in 0..m {
                        big[(a * n + j, c * n + j)] = b[(a, c)];
                    }
                }
            }
            big
        };
        let assemble = Arc::new(assemble);
        let base = self.clone();
        let map = {
            let (assemble, base) = (assemble.clone(), base.clone());
            move |p: BasePoint| assemble(&|q| (base.map)(q), p, 1.0)
        };
        let derivatives = base.derivatives.clone().map(|[dt, dx]| -> [Arc<FibreMap>; 2] {
            let a1 = assemble.clone();
            let a2 = assemble.clone();
            [
                Arc::new(move |p: BasePoint| a1(&|q| dt(q), p, 1.0)),
                Arc::new(move |p: BasePoint| a2(&|q| dx(q), p, -1.0)),
            ]
        });
        Trivialization {
            dimension: m * n,
            map: Arc::new(map),
            derivatives,
            unitary: self.unitary,
        }
    }
}

fn unitarity(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows();
    (m.adjoint() * m - DMatrix::<C64>::identity(d, d))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

pub type Worldline = dyn Fn(f64) -> f64 + Send + Sync;

/// Sample times `t_i` of an observer worldline `x = γ(t)`.
#[derive(Clone)]
pub struct PathSampling {
    times: Vec<f64>,
    worldline: Arc<Worldline>,
}

impl fmt::Debug for PathSampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathSampling").field("times", &self.times).finish()
    }
}

impl PathSampling {
    pub fn new(times: Vec<f64>, worldline: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InsufficientSamples {
                required: 2,
                found: times.len(),
            });
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("path sample time".into()));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "path sample times must increase strictly ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self {
            times,
            worldline: Arc::new(worldline),
        })
    }

    /// `count` samples `t₀ + i·dt`.
    pub fn uniform(t0: f64, dt: f64, count: usize, worldline: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::new((0..count).map(|i| t0 + i as f64 * dt).collect(), worldline)
    }

    /// An observer at rest at `x`.
    pub fn at_rest(t0: f64, dt: f64, count: usize, x: f64) -> Result<Self> {
        Self::uniform(t0, dt, count, move |_| x)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn position(&self, t: f64) -> f64 {
        (self.worldline)(t)
    }

    pub fn point(&self, i: usize) -> BasePoint {
        let t = self.times[i];
        BasePoint::new(t, self.position(t))
    }

    pub fn points(&self) -> Vec<BasePoint> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// `dγ/dt` by central differences.
    pub fn velocity(&self, t: f64) -> f64 {
        let h = 1e-5 * t.abs().max(1.0);
        (self.position(t + h) - self.position(t - h)) / (2.0 * h)
    }

    /// `d l_{γ(t)} / dt = ∂_t l + γ'(t) ∂_x l`.
    pub fn frame_rate(&self, l: &Trivialization, t: f64) -> Result<DMatrix<C64>> {
        let p = BasePoint::new(t, self.position(t));
        let v = self.velocity(t);
        let mut d = l.derivative(p, Axis::T)?;
        if v != 0.0 {
            d += l.derivative(p, Axis::X)? * C64::new(v, 0.0);
        }
        Ok(d)
    }
}
