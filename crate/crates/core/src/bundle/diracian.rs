//! The bundle Diracian `D_x|_y = l_y⁻¹ (mc + (e/c)A̸(x)) l_y` and the residual
//! of the bundle form of the Dirac equation.

use nalgebra::DMatrix;

use super::{BasePoint, Trivialization};
use crate::algebra::{dirac_gammas, slashed_scalars, GammaSet, MatrixOperator};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::reduction::{PhysicalParams, Potentials};
use crate::C64;

#[derive(Clone, Debug)]
pub struct BundleDiracian {
    params: PhysicalParams,
    potentials: Potentials,
    l: Trivialization,
    gammas: GammaSet,
}

pub fn bundle_diracian(params: &PhysicalParams, potentials: &Potentials, l: &Trivialization) -> Result<BundleDiracian> {
    params.validate()?;
    if l.dimension() != 4 {
        return Err(Error::ComponentMismatch {
            expected: 4,
            found: l.dimension(),
        });
    }
    Ok(BundleDiracian {
        params: *params,
        potentials: potentials.clone(),
        l: l.clone(),
        gammas: dirac_gammas(),
    })
}

impl BundleDiracian {
    /// `G^μ(y) = l_y⁻¹ γ^μ l_y`.
    pub fn bundle_gamma(&self, y: BasePoint, mu: usize) -> Result<DMatrix<C64>> {
        Ok(self.l.inverse_at(y)? * self.gammas.gamma(mu) * self.l.at(y)?)
    }

    /// `D_x|_y` for covariant potential components `A_μ(x)`.
    pub fn matrix(&self, a: [f64; 4], y: BasePoint) -> Result<DMatrix<C64>> {
        let p = &self.params;
        let mut core = slashed_scalars(&self.gammas, a) * C64::new(p.charge / p.c, 0.0);
        for k in 0..4 {
            core[(k, k)] += C64::new(p.mass * p.c, 0.0);
        }
        Ok(self.l.inverse_at(y)? * core * self.l.at(y)?)
    }

    /// `max |G^μ(y)·A_μ − l_y⁻¹ A̸ l_y|`.
    pub fn slash_defect(&self, a: [f64; 4], y: BasePoint) -> Result<f64> {
        let mut lhs = DMatrix::zeros(4, 4);
        for (mu, am) in a.iter().enumerate() {
            lhs += self.bundle_gamma(y, mu)? * C64::new(*am, 0.0);
        }
        let rhs = self.l.inverse_at(y)? * slashed_scalars(&self.gammas, a) * self.l.at(y)?;
        Ok((lhs - rhs).iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    /// L² norm over the grid of `iħ G^μ(y) ∂_μΨ − D_x|_y Ψ` at time `t`, where
    /// `Ψ = l_y⁻¹ψ` is built from three snapshots of `ψ` spaced by `dt`.
    pub fn residual(
        &self,
        prev: &GridFunction,
        cur: &GridFunction,
        next: &GridFunction,
        t: f64,
        dt: f64,
        y: BasePoint,
    ) -> Result<f64> {
        for s in [prev, cur, next] {
            if s.components() != 4 {
                return Err(Error::ComponentMismatch {
                    expected: 4,
                    found: s.components(),
                });
            }
        }
        cur.check_shape(prev)?;
        cur.check_shape(next)?;
        let grid = cur.grid();
        let p = &self.params;
        let lift = MatrixOperator::from_constant(&self.l.inverse_at(y)?)?;
        let (bp, b0, bn) = (lift.apply(prev)?, lift.apply(cur)?, lift.apply(next)?);
        let d0 = bn.axpy(C64::new(-1.0, 0.0), &bp)?.scaled(C64::new(1.0 / (2.0 * dt * p.c), 0.0));
        let d1 = b0.derivative(1)?;
        let g0 = MatrixOperator::from_constant(&self.bundle_gamma(y, 0)?)?;
        let g1 = MatrixOperator::from_constant(&self.bundle_gamma(y, 1)?)?;
        let lhs = g0.apply(&d0)?.axpy(C64::new(1.0, 0.0), &g1.apply(&d1)?)?.scaled(C64::new(0.0, p.hbar));
        let a = self.potentials.covariant(t, grid)?;
        let mut rhs = GridFunction::zeros(grid, 4);
        for (j, aj) in a.iter().enumerate() {
            let v = self.matrix(*aj, y)? * nalgebra::DVector::from_vec(b0.point(j));
            rhs.set_point(j, v.as_slice());
        }
        Ok(lhs.axpy(C64::new(-1.0, 0.0), &rhs)?.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_frame_without_field_is_mass_term() {
        let params = PhysicalParams::new(1.5, 1.0, 1.0, 2.0).unwrap();
        let d = bundle_diracian(&params, &Potentials::zero(), &Trivialization::identity(4)).unwrap();
        let m = d.matrix([0.0; 4], BasePoint::new(0.0, 0.0)).unwrap();
        assert_eq!(m, DMatrix::from_diagonal_element(4, 4, C64::new(3.0, 0.0)));
    }

    #[test]
    fn conjugated_slash_matches_componentwise() {
        let params = PhysicalParams::default();
        let l = Trivialization::phase_field(4, |p| p.x + p.t, |_| (1.0, 1.0));
        let d = bundle_diracian(&params, &Potentials::zero(), &l).unwrap();
        assert!(d.slash_defect([0.3, -1.2, 0.0, 0.5], BasePoint::new(0.2, 1.0)).unwrap() <= 1e-12);
    }
}
