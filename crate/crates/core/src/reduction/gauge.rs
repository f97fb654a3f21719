//! Time-dependent changes of the state variable, `ψ̃ = A(t)ψ`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{HamiltonianFactory, HamiltonianKind, PhysicalParams};
use crate::algebra::MatrixOperator;
use crate::error::{Error, Result};
use crate::C64;

type MatrixFn = dyn Fn(f64) -> DMatrix<C64> + Send + Sync;

/// Nondegenerate matrix-valued function of time acting on the components.
#[derive(Clone)]
pub struct GaugeFrame {
    dimension: usize,
    constant: bool,
    time_scale: f64,
    matrix: Arc<MatrixFn>,
    derivative: Option<Arc<MatrixFn>>,
}

impl fmt::Debug for GaugeFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaugeFrame")
            .field("dimension", &self.dimension)
            .field("constant", &self.constant)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl GaugeFrame {
    pub fn constant(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let frame = Self {
            dimension: matrix.nrows(),
            constant: true,
            time_scale: 1.0,
            matrix: Arc::new(move |_| matrix.clone()),
            derivative: None,
        };
        frame.inverse_at(0.0)?;
        Ok(frame)
    }

    /// `A(t)`; `∂A/∂t` is taken by central differences.
    pub fn from_fn(dimension: usize, f: impl Fn(f64) -> DMatrix<C64> + Send + Sync + 'static) -> Self {
        Self {
            dimension,
            constant: false,
            time_scale: 1.0,
            matrix: Arc::new(f),
            derivative: None,
        }
    }

    pub fn with_derivative(mut self, df: impl Fn(f64) -> DMatrix<C64> + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(df));
        self
    }

    /// Time scale setting the finite-difference step `1e-6·scale`.
    pub fn with_time_scale(mut self, scale: f64) -> Self {
        self.time_scale = scale;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn at(&self, t: f64) -> Result<DMatrix<C64>> {
        let m = (self.matrix)(t);
        if m.nrows() != self.dimension || m.ncols() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: m.nrows().max(m.ncols()),
            });
        }
        Ok(m)
    }

    pub fn inverse_at(&self, t: f64) -> Result<DMatrix<C64>> {
        self.at(t)?.try_inverse().ok_or_else(|| Error::Singular {
            context: format!("gauge frame at t = {t} (condition {:.3e})", self.condition_number(t).unwrap_or(f64::INFINITY)),
        })
    }

    pub fn derivative_at(&self, t: f64) -> Result<DMatrix<C64>> {
        if self.constant {
            return Ok(DMatrix::zeros(self.dimension, self.dimension));
        }
        if let Some(df) = &self.derivative {
            return Ok(df(t));
        }
        let eps = 1e-6 * self.time_scale;
        Ok((self.at(t + eps)? - self.at(t - eps)?) / C64::new(2.0 * eps, 0.0))
    }

    /// Ratio of extreme singular values of `A(t)`.
    pub fn condition_number(&self, t: f64) -> Result<f64> {
        let sv = self.at(t)?.singular_values();
        let max = sv.max();
        let min = sv.min();
        Ok(if min == 0.0 { f64::INFINITY } else { max / min })
    }
}

/// `H̃(t) = A·H·A⁻¹ + iħ·(∂A/∂t)·A⁻¹`, the Hamiltonian governing `ψ̃ = Aψ`.
pub fn gauge_transform(h: &HamiltonianFactory, frame: &GaugeFrame) -> Result<HamiltonianFactory> {
    if h.dimension() != frame.dimension() {
        return Err(Error::ComponentMismatch {
            expected: h.dimension(),
            found: frame.dimension(),
        });
    }
    let inner = h.clone();
    let frame = frame.clone();
    let hbar = h.hbar();
    let time_independent = h.is_time_independent() && frame.is_constant();
    Ok(HamiltonianFactory::new(
        HamiltonianKind::Gauge,
        h.dimension(),
        hbar,
        time_independent,
        move |t, grid| {
            let a = frame.at(t)?;
            let a_inv = frame.inverse_at(t)?;
            let conj = MatrixOperator::from_constant(&a)?
                .odot(&inner.at(t, grid)?)?
                .odot(&MatrixOperator::from_constant(&a_inv)?)?;
            if frame.is_constant() {
                return Ok(conj);
            }
            let drift = frame.derivative_at(t)? * &a_inv * C64::new(0.0, hbar);
            conj.add(&MatrixOperator::from_constant(&drift)?)
        },
    ))
}

/// Constant frame `(φ, ∂φ/∂t) ↦ (φ + (iħ/mc²)∂φ/∂t, φ − (iħ/mc²)∂φ/∂t)`.
pub fn kg_nonrel_frame(params: &PhysicalParams) -> Result<GaugeFrame> {
    let mc2 = params.rest_energy();
    if mc2 == 0.0 {
        return Err(Error::InvalidParameter("the non-relativistic frame needs m > 0".into()));
    }
    let s = C64::new(0.0, params.hbar / mc2);
    let one = C64::new(1.0, 0.0);
    GaugeFrame::constant(DMatrix::from_row_slice(2, 2, &[one, s, one, -s]))
}
