use nalgebra::DMatrix;

use super::{Equation, GreenKernel};
use crate::error::{Error, Result};
use crate::evolution::DENSE_LIMIT;
use crate::grid::SpatialGrid1D;
use crate::reduction::{HamiltonianFactory, PhysicalParams, Potentials};
use crate::C64;

/// Scalar Klein-Gordon kernel `g(x',x)` with `φ(t') = ∫dx g·∂₀φ(t)` for data
/// `φ(t) = 0`, read off the exact exponential of the canonical Hamiltonian:
/// `g = c·U₁₂/h`.
pub fn kg_scalar_kernel(h: &HamiltonianFactory, grid: &SpatialGrid1D, c: f64, t_prime: f64, t: f64) -> Result<GreenKernel> {
    if h.dimension() != 2 {
        return Err(Error::ComponentMismatch {
            expected: 2,
            found: h.dimension(),
        });
    }
    if !h.is_time_independent() {
        return Err(Error::TimeDependent);
    }
    let n = grid.len();
    if 2 * n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            dimension: 2 * n,
            limit: DENSE_LIMIT,
        });
    }
    if t_prime <= t {
        return Ok(GreenKernel::assemble(Equation::KleinGordon, grid, 1, 1, h.hbar(), c, t_prime, t, DMatrix::zeros(0, 0)));
    }
    let gen = h.dense(t, grid)? * C64::new(0.0, -(t_prime - t) / h.hbar());
    let u = gen.exp();
    let g = u.view((0, n), (n, n)) * C64::new(c / grid.spacing(), 0.0);
    Ok(GreenKernel::assemble(Equation::KleinGordon, grid, 1, 1, h.hbar(), c, t_prime, t, g.into_owned()))
}

/// Scalar kernels for the source slices `t − δ`, `t`, `t + δ`.
pub fn kg_scalar_slices(
    h: &HamiltonianFactory,
    grid: &SpatialGrid1D,
    c: f64,
    t_prime: f64,
    t: f64,
    delta: f64,
) -> Result<Vec<GreenKernel>> {
    if !(delta > 0.0) || t_prime - t <= delta {
        return Err(Error::InvalidParameter(format!(
            "slice spacing {delta} must be positive and below t' − t = {}",
            t_prime - t
        )));
    }
    [t - delta, t, t + delta]
        .iter()
        .map(|&s| kg_scalar_kernel(h, grid, c, t_prime, s))
        .collect()
}

/// Two-component kernel `𝗀 = (−∂₀g + 2ib·g, g)` with `b = eA₀/(ħc)` taken at
/// the source slice, so that `φ(x') = ∫dx [𝗀₁φ + 𝗀₂∂₀φ]`.
///
/// `slices` are scalar kernels at source times `t − δ`, `t`, `t + δ`; the
/// source derivative is a central difference across them.
pub fn kg_green_vector(slices: &[GreenKernel], params: &PhysicalParams, potentials: &Potentials) -> Result<GreenKernel> {
    if slices.len() < 3 {
        return Err(Error::InsufficientSamples {
            required: 3,
            found: slices.len(),
        });
    }
    let [before, at, after] = [&slices[0], &slices[1], &slices[2]];
    for s in [before, at, after] {
        if s.equation != Equation::KleinGordon || s.input_components != 1 {
            return Err(Error::IncompatibleKernel("expected scalar Klein-Gordon kernels".into()));
        }
        at.grid.check_same(&s.grid)?;
        if s.t_prime != at.t_prime {
            return Err(Error::IncompatibleKernel("slices have different target times".into()));
        }
    }
    let delta = at.t - before.t;
    if !(delta > 0.0) || ((after.t - at.t) - delta).abs() > 1e-9 * delta.max(1e-300) * 1e3 {
        return Err(Error::InvalidParameter("source slices must be equally spaced and increasing".into()));
    }
    if at.t_prime <= after.t {
        return Err(Error::NotRetarded {
            t_prime: at.t_prime,
            t: after.t,
        });
    }
    let n = at.grid.len();
    let c = params.c;
    let phi = potentials.scalar.sample(at.t, &at.grid)?;
    let d0 = (&after.matrix - &before.matrix) * C64::new(1.0 / (2.0 * delta * c), 0.0);
    let mut out = DMatrix::zeros(n, 2 * n);
    for x in 0..n {
        let b = params.charge * phi[x] / (params.hbar * c);
        for xp in 0..n {
            out[(xp, x)] = -d0[(xp, x)] + C64::new(0.0, 2.0 * b) * at.matrix[(xp, x)];
            out[(xp, n + x)] = at.matrix[(xp, x)];
        }
    }
    Ok(GreenKernel::assemble(
        Equation::KleinGordon,
        &at.grid,
        2,
        1,
        params.hbar,
        c,
        at.t_prime,
        at.t,
        out,
    ))
}
