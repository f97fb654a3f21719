//! Companion form of `∂ⁿφ/∂tⁿ = Σ_i f_i(t) ∂ⁱφ/∂tⁱ`.

use std::sync::Arc;

use super::{HamiltonianFactory, HamiltonianKind};
use crate::algebra::{GridOperator, MatrixOperator};
use crate::error::{Error, Result};
use crate::grid::SpatialGrid1D;
use crate::C64;

pub type CoefficientFn = dyn Fn(f64, &SpatialGrid1D) -> Result<MatrixOperator> + Send + Sync;

/// Linear n-th order evolution equation solved for its highest time derivative.
#[derive(Clone)]
pub struct LinearTimeSystem {
    base_components: usize,
    hbar: f64,
    time_independent: bool,
    coefficients: Vec<Arc<CoefficientFn>>,
}

impl std::fmt::Debug for LinearTimeSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearTimeSystem")
            .field("order", &self.order())
            .field("base_components", &self.base_components)
            .field("time_independent", &self.time_independent)
            .finish()
    }
}

impl LinearTimeSystem {
    /// `coefficients[i]` is `f_i(t)`, the factor of `∂ⁱφ/∂tⁱ`.
    pub fn new(
        base_components: usize,
        hbar: f64,
        time_independent: bool,
        coefficients: Vec<Arc<CoefficientFn>>,
    ) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidParameter("time order must be at least 1".into()));
        }
        if base_components == 0 {
            return Err(Error::InvalidParameter("base component count must be positive".into()));
        }
        Ok(Self {
            base_components,
            hbar,
            time_independent,
            coefficients,
        })
    }

    /// Time-independent coefficients.
    pub fn constant(hbar: f64, coefficients: Vec<MatrixOperator>) -> Result<Self> {
        let m = coefficients.first().map(MatrixOperator::dimension).unwrap_or(0);
        if let Some(bad) = coefficients.iter().find(|c| c.dimension() != m) {
            return Err(Error::ComponentMismatch {
                expected: m,
                found: bad.dimension(),
            });
        }
        let coefficients = coefficients
            .into_iter()
            .map(|op| Arc::new(move |_: f64, _: &SpatialGrid1D| Ok(op.clone())) as Arc<CoefficientFn>)
            .collect();
        Self::new(m, hbar, true, coefficients)
    }

    /// Scalar equation with constant numeric coefficients.
    pub fn scalar(hbar: f64, coefficients: &[C64]) -> Result<Self> {
        Self::constant(
            hbar,
            coefficients
                .iter()
                .map(|&c| MatrixOperator::diagonal(1, GridOperator::scale(c)))
                .collect(),
        )
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn base_components(&self) -> usize {
        self.base_components
    }

    pub fn coefficient(&self, i: usize, t: f64, grid: &SpatialGrid1D) -> Result<MatrixOperator> {
        let op = (self.coefficients[i])(t, grid)?;
        if op.dimension() != self.base_components {
            return Err(Error::ComponentMismatch {
                expected: self.base_components,
                found: op.dimension(),
            });
        }
        Ok(op)
    }
}

/// `H = iħ·[[0, Id, 0, …], …, [f_0, f_1, …, f_{n−1}]]` acting on
/// `ψ = (φ, ∂φ/∂t, …, ∂ⁿ⁻¹φ/∂tⁿ⁻¹)`.
pub fn companion_hamiltonian(sys: &LinearTimeSystem) -> HamiltonianFactory {
    let sys = sys.clone();
    let n = sys.order();
    let m = sys.base_components;
    let ih = C64::new(0.0, sys.hbar);
    HamiltonianFactory::new(
        HamiltonianKind::Companion,
        n * m,
        sys.hbar,
        sys.time_independent,
        move |t, grid| {
            let mut h = MatrixOperator::zero(n * m);
            for block in 0..n - 1 {
                for a in 0..m {
                    h.set_entry(block * m + a, (block + 1) * m + a, GridOperator::scale(ih));
                }
            }
            for i in 0..n {
                let f = sys.coefficient(i, t, grid)?;
                for a in 0..m {
                    for b in 0..m {
                        h.set_entry((n - 1) * m + a, i * m + b, f.entry(a, b).scaled(ih));
                    }
                }
            }
            Ok(h)
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_order_is_scaled_coefficient() {
        let sys = LinearTimeSystem::scalar(1.0, &[C64::new(0.5, 0.0)]).unwrap();
        let h = companion_hamiltonian(&sys);
        let grid = SpatialGrid1D::periodic(8, 1.0).unwrap();
        let d = h.dense(0.0, &grid).unwrap();
        for j in 0..8 {
            assert_eq!(d[(j, j)], C64::new(0.0, 0.5));
        }
    }

    #[test]
    fn second_order_shape() {
        let sys = LinearTimeSystem::constant(
            2.0,
            vec![
                MatrixOperator::diagonal(1, GridOperator::Laplacian),
                MatrixOperator::diagonal(1, GridOperator::scale(3.0)),
            ],
        )
        .unwrap();
        let h = companion_hamiltonian(&sys).at(0.0, &SpatialGrid1D::periodic(8, 1.0).unwrap()).unwrap();
        assert!(h.entry(0, 0).is_zero());
        assert!(matches!(h.entry(0, 1), GridOperator::Scale(c) if *c == C64::new(0.0, 2.0)));
        assert_eq!(h.entry(1, 1), &GridOperator::Scale(C64::new(0.0, 6.0)));
        assert!(matches!(h.entry(1, 0), GridOperator::Compose(_)));
    }

    #[test]
    fn empty_system_rejected() {
        assert!(LinearTimeSystem::new(1, 1.0, true, Vec::new()).is_err());
    }
}
