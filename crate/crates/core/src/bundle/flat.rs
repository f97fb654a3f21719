//! The flat transport `L(y, x) = l_y⁻¹·l_x` along the identity map and the
//! sections it transports.

use nalgebra::{DMatrix, DVector};

use super::{Axis, BasePoint, Trivialization};
use crate::error::{Error, Result};
use crate::C64;

/// Transport along the identity map of the base generated by `l`. The time
/// coordinate of the base is `x⁰ = ct`.
#[derive(Clone, Debug)]
pub struct FlatTransport {
    l: Trivialization,
    c: f64,
}

pub fn flat_transport(l: Trivialization, c: f64) -> Result<FlatTransport> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("speed of light must be positive, got {c}")));
    }
    Ok(FlatTransport { l, c })
}

impl FlatTransport {
    pub fn trivialization(&self) -> &Trivialization {
        &self.l
    }

    pub fn dimension(&self) -> usize {
        self.l.dimension()
    }

    /// `L(y, x) = l_y⁻¹·l_x`.
    pub fn between(&self, y: BasePoint, x: BasePoint) -> Result<DMatrix<C64>> {
        Ok(self.l.inverse_at(y)? * self.l.at(x)?)
    }

    /// Product of the transports between consecutive points of `points`.
    pub fn chain(&self, points: &[BasePoint]) -> Result<DMatrix<C64>> {
        let d = self.dimension();
        let mut acc = DMatrix::identity(d, d);
        for w in points.windows(2) {
            acc = self.between(w[1], w[0])? * acc;
        }
        Ok(acc)
    }

    /// `Γ_μ(x) = l⁻¹ ∂l/∂x^μ`; `μ = 2, 3` vanish in the 1D reduction.
    pub fn coefficient(&self, x: BasePoint, mu: usize) -> Result<DMatrix<C64>> {
        let d = self.dimension();
        match mu {
            0 => Ok(self.l.inverse_at(x)? * self.l.derivative(x, Axis::T)? / C64::new(self.c, 0.0)),
            1 => Ok(self.l.inverse_at(x)? * self.l.derivative(x, Axis::X)?),
            2 | 3 => Ok(DMatrix::zeros(d, d)),
            _ => Err(Error::InvalidParameter(format!("spacetime index {mu} out of range"))),
        }
    }

    fn shifted(&self, p: BasePoint, mu: usize, s: f64) -> BasePoint {
        match mu {
            0 => BasePoint::new(p.t + s / self.c, p.x),
            _ => BasePoint::new(p.t, p.x + s),
        }
    }

    /// `max |∂L(y,x)/∂y^μ + Γ_μ(y)·L(y,x)|` with the derivative taken by a
    /// central difference of step `h`.
    pub fn derivative_defect(&self, y: BasePoint, x: BasePoint, mu: usize, h: f64) -> Result<f64> {
        if mu > 1 {
            return Ok(0.0);
        }
        let plus = self.between(self.shifted(y, mu, h), x)?;
        let minus = self.between(self.shifted(y, mu, -h), x)?;
        let d = (plus - minus) / C64::new(2.0 * h, 0.0);
        let r = d + self.coefficient(y, mu)? * self.between(y, x)?;
        Ok(r.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }
}

/// `Ψ(x) = l_x⁻¹ψ₀` at each of `points`.
pub fn transported_section(psi0: &DVector<C64>, l: &Trivialization, points: &[BasePoint]) -> Result<Vec<DVector<C64>>> {
    if psi0.len() != l.dimension() {
        return Err(Error::DimensionMismatch {
            expected: l.dimension(),
            found: psi0.len(),
        });
    }
    points.iter().map(|&p| Ok(l.inverse_at(p)? * psi0)).collect()
}

/// `|(Ψ(x + h e_μ) − Ψ(x))/h + Γ_μ(x)Ψ(x)|` for `Ψ = l⁻¹ψ₀`, a first-order
/// discretization of `D_μΨ`.
pub fn section_derivation_residual(
    flat: &FlatTransport,
    psi0: &DVector<C64>,
    x: BasePoint,
    mu: usize,
    h: f64,
) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    let l = flat.trivialization();
    let here = l.inverse_at(x)? * psi0;
    let there = l.inverse_at(flat.shifted(x, mu, h))? * psi0;
    let r = (there - &here) / C64::new(h, 0.0) + flat.coefficient(x, mu)? * here;
    Ok(r.norm())
}
