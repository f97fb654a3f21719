//! Observables and mean values `⟨ψ|Aψ⟩ / ⟨ψ|ψ⟩`.

use crate::algebra::MatrixOperator;
use crate::error::{Error, Result};
use crate::grid::{inner, FibreProduct, GridFunction};
use crate::C64;

#[derive(Clone, Debug)]
pub struct Observable {
    pub operator: MatrixOperator,
    pub fibre: FibreProduct,
    pub hermitian: bool,
}

impl Observable {
    pub fn new(operator: MatrixOperator, fibre: FibreProduct, hermitian: bool) -> Self {
        Self {
            operator,
            fibre,
            hermitian,
        }
    }

    /// Hermitian observable under the identity fibre product.
    pub fn hermitian(operator: MatrixOperator) -> Self {
        Self::new(operator, FibreProduct::Identity, true)
    }

    /// `|⟨χ|Aψ⟩ − ⟨Aχ|ψ⟩|`.
    pub fn hermiticity_defect(&self, psi: &GridFunction, chi: &GridFunction) -> Result<f64> {
        let a_psi = self.operator.apply(psi)?;
        let a_chi = self.operator.apply(chi)?;
        Ok((inner(chi, &a_psi, &self.fibre)? - inner(&a_chi, psi, &self.fibre)?).norm())
    }
}

/// `⟨ψ|Aψ⟩ / ⟨ψ|ψ⟩` with the observable's fibre product.
pub fn expectation(obs: &Observable, psi: &GridFunction) -> Result<C64> {
    let norm2 = inner(psi, psi, &obs.fibre)?;
    if norm2.norm() == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(inner(psi, &obs.operator.apply(psi)?, &obs.fibre)? / norm2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid1D;

    #[test]
    fn identity_expectation_is_one_and_scale_invariant() {
        let grid = SpatialGrid1D::periodic(16, 3.0).unwrap();
        let psi = GridFunction::from_fn(&grid, 2, |a, x| C64::new(x.sin() + a as f64, x));
        let obs = Observable::hermitian(MatrixOperator::identity(2));
        assert!((expectation(&obs, &psi).unwrap() - 1.0).norm() < 1e-14);
        let d = Observable::hermitian(MatrixOperator::diagonal(2, crate::algebra::GridOperator::Laplacian));
        let a = expectation(&d, &psi).unwrap();
        let b = expectation(&d, &psi.scaled(C64::new(-2.0, 3.0))).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn zero_state_rejected() {
        let grid = SpatialGrid1D::periodic(8, 1.0).unwrap();
        let obs = Observable::hermitian(MatrixOperator::identity(1));
        assert_eq!(expectation(&obs, &GridFunction::zeros(&grid, 1)), Err(Error::ZeroNorm));
    }
}
