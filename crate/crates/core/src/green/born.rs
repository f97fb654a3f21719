use nalgebra::DMatrix;

use super::{gamma0_flat, EigenBasis, Equation, GreenKernel};
use crate::algebra::{dirac_gammas, slashed_scalars};
use crate::error::{Error, Result};
use crate::reduction::{PhysicalParams, Potentials};
use crate::C64;

const MAX_TERMS: usize = 3;

/// `P·M` where `P` acts on the spinor index pointwise, `P = blocks[j]` at point `j`.
fn left_pointwise(blocks: &[DMatrix<C64>], m: &DMatrix<C64>, n: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (j, p) in blocks.iter().enumerate() {
        for a in 0..4 {
            for b in 0..4 {
                let w = p[(a, b)];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for col in 0..m.ncols() {
                    out[(a * n + j, col)] += w * m[(b * n + j, col)];
                }
            }
        }
    }
    out
}

/// Partial sum of the Born series
/// `g = g₀ + ∫dt'' h·Σ_y g₀(x',y) eA̸(y) g(y,x)` truncated after `terms`
/// corrections, on `steps` trapezoid intervals of `[t, t']`.
///
/// The free kernel `g₀` comes from `free`. At coinciding times the integrand
/// uses the one-sided limit `g₀(τ → 0⁺) = γ⁰/(iħh)`.
#[allow(clippy::too_many_arguments)]
pub fn born_series_green(
    free: &EigenBasis,
    params: &PhysicalParams,
    potentials: &Potentials,
    t_prime: f64,
    t: f64,
    steps: usize,
    terms: usize,
) -> Result<GreenKernel> {
    if free.components() != 4 {
        return Err(Error::ComponentMismatch {
            expected: 4,
            found: free.components(),
        });
    }
    if terms > MAX_TERMS {
        return Err(Error::InvalidParameter(format!(
            "Born series is truncated at {MAX_TERMS} terms, got {terms}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("Born series needs at least one time step".into()));
    }
    params.validate()?;
    let grid = free.grid().clone();
    let n = grid.len();
    let hbar = free.hbar();
    let h = grid.spacing();
    if t_prime <= t {
        return Ok(GreenKernel::assemble(Equation::Dirac, &grid, 4, 4, hbar, params.c, t_prime, t, DMatrix::zeros(0, 0)));
    }

    let ds = (t_prime - t) / steps as f64;
    let gamma0 = gamma0_flat(n);
    let norm = C64::new(0.0, hbar * h).inv();
    // free[k] = g₀(k·ds), with free[0] the one-sided limit.
    let free_kernels: Vec<DMatrix<C64>> = (0..=steps).map(|k| free.propagator(k as f64 * ds) * norm * &gamma0).collect();
    let gammas = dirac_gammas();
    let slash: Vec<Vec<DMatrix<C64>>> = (0..=steps)
        .map(|j| {
            let a = potentials.covariant(t + j as f64 * ds, &grid)?;
            Ok(a.iter().map(|am| slashed_scalars(&gammas, *am) * C64::new(params.charge, 0.0)).collect())
        })
        .collect::<Result<_>>()?;

    let weight = |j: usize, i: usize| if j == 0 || j == i { 0.5 } else { 1.0 };
    let mut current = free_kernels.clone();
    for k in 1..=terms {
        // eA̸(s_j)·g(s_j, t) is shared by every later row i.
        let rows: Vec<usize> = if k == terms { vec![steps] } else { (1..=steps).collect() };
        let sourced: Vec<DMatrix<C64>> = (0..=steps)
            .map(|j| left_pointwise(&slash[j], &current[j], n))
            .collect();
        let mut next = current.clone();
        for &i in &rows {
            let mut acc = free_kernels[i].clone();
            for (j, src) in sourced.iter().enumerate().take(i + 1) {
                let f = C64::new(weight(j, i) * ds * h, 0.0);
                acc += (&free_kernels[i - j] * src) * f;
            }
            next[i] = acc;
        }
        current = next;
    }
    Ok(GreenKernel::assemble(
        Equation::Dirac,
        &grid,
        4,
        4,
        hbar,
        params.c,
        t_prime,
        t,
        current.swap_remove(steps),
    ))
}
