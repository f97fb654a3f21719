//! Hamiltonians of the Schrödinger, Dirac, Klein-Gordon and Maxwell equations
//! on a 1D grid.

use nalgebra::DMatrix;

use super::{HamiltonianFactory, HamiltonianKind, PhysicalParams, Potentials};
use crate::algebra::{dirac_gammas, kg_gammas, GridOperator, MatrixOperator};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, SpatialGrid1D};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn multiply(values: impl IntoIterator<Item = C64>) -> GridOperator {
    GridOperator::multiply(values.into_iter().collect::<Vec<_>>())
}

fn check_params(params: &PhysicalParams) -> Result<()> {
    params.validate()
}

/// `H = (−iħ∂ − (e/c)A)²/2m + eφ`.
pub fn schrodinger_hamiltonian(params: &PhysicalParams, potentials: &Potentials) -> Result<HamiltonianFactory> {
    check_params(params)?;
    if params.mass <= 0.0 {
        return Err(Error::InvalidParameter("Schrödinger Hamiltonian needs m > 0".into()));
    }
    let p = *params;
    let pot = potentials.clone();
    let kind = if pot.is_zero() {
        HamiltonianKind::SchrodingerFree
    } else {
        HamiltonianKind::Schrodinger
    };
    Ok(HamiltonianFactory::new(kind, 1, p.hbar, pot.is_static(), move |t, grid| {
        let m2 = 2.0 * p.mass;
        let mut h = GridOperator::Laplacian.scaled(-p.hbar * p.hbar / m2);
        let phi = pot.scalar.sample(t, grid)?;
        let ax = pot.vector.sample(t, grid)?;
        if !pot.vector.is_zero() {
            let a = GridOperator::multiply_real(&ax);
            let sym = GridOperator::Derivative(1).compose(&a).plus(&a.compose(&GridOperator::Derivative(1)));
            h = h.plus(&sym.scaled(I * p.hbar * p.charge / (m2 * p.c)));
        }
        let diag = phi
            .iter()
            .zip(&ax)
            .map(|(f, a)| real(p.charge * f + (p.charge * a / p.c).powi(2) / m2));
        h = h.plus(&multiply(diag));
        Ok(MatrixOperator::diagonal(1, h))
    }))
}

/// Momentum-space symbol `cα¹ħk + mc²β` of the free 1D Dirac Hamiltonian.
pub fn dirac_symbol(params: &PhysicalParams, k: f64) -> DMatrix<C64> {
    let g = dirac_gammas();
    g.alpha(1) * real(params.c * params.hbar * k) + g.beta() * real(params.rest_energy())
}

/// `H_D = eφ + cα¹(−iħ∂ − (e/c)A_x) + mc²β` on 4-spinors.
pub fn dirac_hamiltonian(params: &PhysicalParams, potentials: &Potentials) -> Result<HamiltonianFactory> {
    check_params(params)?;
    let p = *params;
    let pot = potentials.clone();
    let g = dirac_gammas();
    let alpha = g.alpha(1);
    let beta = g.beta().clone();
    Ok(HamiltonianFactory::new(HamiltonianKind::Dirac, 4, p.hbar, pot.is_static(), move |t, grid| {
        let phi = pot.scalar.sample(t, grid)?;
        let ax = pot.vector.sample(t, grid)?;
        let e_phi = GridOperator::multiply_real(&phi.iter().map(|v| p.charge * v).collect::<Vec<_>>());
        let e_ax = GridOperator::multiply_real(&ax.iter().map(|v| p.charge * v).collect::<Vec<_>>());
        let kinetic = GridOperator::Derivative(1).scaled(-I * p.hbar * p.c);
        Ok(MatrixOperator::from_fn(4, |r, c| {
            let a = alpha[(r, c)];
            let mut op = kinetic.scaled(a);
            op = op.plus(&GridOperator::scale(beta[(r, c)] * p.rest_energy()));
            op = op.plus(&e_ax.scaled(-a));
            if r == c {
                op = op.plus(&e_phi);
            }
            op
        }))
    }))
}

/// `(f_0, f_1)` of the Klein-Gordon equation solved for `∂²φ/∂t²`.
fn kg_coefficients(p: &PhysicalParams, pot: &Potentials, t: f64, grid: &SpatialGrid1D) -> Result<(GridOperator, GridOperator)> {
    let (hb, c, e) = (p.hbar, p.c, p.charge);
    let phi = pot.scalar.sample(t, grid)?;
    let ax = pot.vector.sample(t, grid)?;
    let dphi = pot.scalar.time_derivative(t, grid)?;
    let mut f0 = GridOperator::Laplacian.scaled(c * c);
    if !pot.vector.is_zero() {
        let a = GridOperator::multiply_real(&ax);
        let sym = GridOperator::Derivative(1).compose(&a).plus(&a.compose(&GridOperator::Derivative(1)));
        f0 = f0.plus(&sym.scaled(-I * e * c / hb));
    }
    let mc2 = p.rest_energy();
    let pointwise = (0..grid.len()).map(|j| {
        real(-(e * ax[j] / hb).powi(2) - (mc2 / hb).powi(2) + (e * phi[j] / hb).powi(2)) + dphi[j] * e / (I * hb)
    });
    f0 = f0.plus(&multiply(pointwise));
    let f1 = multiply(phi.iter().map(|v| 2.0 * e * v / (I * hb)));
    Ok((f0, f1))
}

/// `H = iħ·[[0, Id], [f_0, (2e/iħ)φ]]` on `(φ, ∂φ/∂t)`.
pub fn kg_canonical_hamiltonian(params: &PhysicalParams, potentials: &Potentials) -> Result<HamiltonianFactory> {
    check_params(params)?;
    let p = *params;
    let pot = potentials.clone();
    Ok(HamiltonianFactory::new(HamiltonianKind::KgCanonical, 2, p.hbar, pot.is_static(), move |t, grid| {
        let (f0, f1) = kg_coefficients(&p, &pot, t, grid)?;
        let ih = I * p.hbar;
        Ok(MatrixOperator::from_entries(
            2,
            vec![GridOperator::Zero, GridOperator::scale(ih), f0.scaled(ih), f1.scaled(ih)],
        )?)
    }))
}

/// Hamiltonian for `(φ + (iħ/mc²)∂φ/∂t, φ − (iħ/mc²)∂φ/∂t)`.
pub fn kg_nonrel_hamiltonian(params: &PhysicalParams, potentials: &Potentials) -> Result<HamiltonianFactory> {
    check_params(params)?;
    let mc2 = params.rest_energy();
    if mc2 == 0.0 {
        return Err(Error::InvalidParameter("the non-relativistic split divides by mc², need m > 0".into()));
    }
    let p = *params;
    let pot = potentials.clone();
    Ok(HamiltonianFactory::new(HamiltonianKind::KgNonrel, 2, p.hbar, pot.is_static(), move |t, grid| {
        let (f0, _) = kg_coefficients(&p, &pot, t, grid)?;
        let phi = pot.scalar.sample(t, grid)?;
        let kin = f0.scaled(p.hbar * p.hbar / mc2);
        let diag = |s_rest: f64, s_phi: f64| {
            multiply(phi.iter().map(|v| real(0.5 * (s_rest * mc2 + 2.0 * s_phi * p.charge * v))))
        };
        let half_kin = kin.scaled(0.5);
        let neg_half_kin = kin.scaled(-0.5);
        Ok(MatrixOperator::from_entries(
            2,
            vec![
                diag(1.0, 1.0).plus(&neg_half_kin),
                diag(-1.0, -1.0).plus(&neg_half_kin),
                diag(1.0, -1.0).plus(&half_kin),
                diag(-1.0, 1.0).plus(&half_kin),
            ],
        )?)
    }))
}

/// Free Klein-Gordon field as the 5-component state
/// `(mc²φ, ∂φ/∂t, ∂φ/∂x, ∂φ/∂y, ∂φ/∂z)`; the y and z entries stay zero.
pub fn kg_5d_hamiltonian(params: &PhysicalParams) -> Result<HamiltonianFactory> {
    check_params(params)?;
    if params.mass <= 0.0 {
        return Err(Error::InvalidParameter("kg-5d needs m > 0".into()));
    }
    let p = *params;
    let mc2 = p.rest_energy();
    let ih = I * p.hbar;
    let mut h = MatrixOperator::zero(5);
    h.set_entry(0, 1, GridOperator::scale(ih * mc2));
    h.set_entry(1, 0, GridOperator::scale(-ih * mc2 / (p.hbar * p.hbar)));
    h.set_entry(1, 2, GridOperator::Derivative(1).scaled(ih * p.c * p.c));
    h.set_entry(2, 1, GridOperator::Derivative(1).scaled(ih));
    Ok(HamiltonianFactory::fixed(HamiltonianKind::Kg5d, h, p.hbar))
}

/// Builds the kg-5d state from `φ` and `∂φ/∂t`.
pub fn kg5d_state_from_scalar(params: &PhysicalParams, phi: &GridFunction, phi_t: &GridFunction) -> Result<GridFunction> {
    if phi.components() != 1 || phi_t.components() != 1 {
        return Err(Error::ComponentMismatch {
            expected: 1,
            found: phi.components().max(phi_t.components()),
        });
    }
    phi.check_shape(phi_t)?;
    let grid = phi.grid();
    let zero = GridFunction::zeros(grid, 1);
    GridFunction::stack(&[
        phi.scaled(real(params.rest_energy())),
        phi_t.clone(),
        phi.derivative(1)?,
        zero.clone(),
        zero,
    ])
}

/// L² norm of `(iħΓ^μ∂_μ − mc)ϕ` at the middle of three snapshots spaced by
/// `dt`, where `ϕ = ((iħ/c)∂_tφ, iħ∇φ, mcφ)` is rebuilt from kg-5d states.
pub fn kg5d_covariant_residual(
    params: &PhysicalParams,
    prev: &GridFunction,
    cur: &GridFunction,
    next: &GridFunction,
    dt: f64,
) -> Result<f64> {
    for s in [prev, cur, next] {
        if s.components() != 5 {
            return Err(Error::ComponentMismatch {
                expected: 5,
                found: s.components(),
            });
        }
    }
    cur.check_shape(prev)?;
    cur.check_shape(next)?;
    let (hb, c) = (params.hbar, params.c);
    let covariant = |s: &GridFunction| -> Result<GridFunction> {
        let comps = [
            s.slice_components(1, 1)?.scaled(I * hb / c),
            s.slice_components(2, 1)?.scaled(I * hb),
            s.slice_components(3, 1)?.scaled(I * hb),
            s.slice_components(4, 1)?.scaled(I * hb),
            s.slice_components(0, 1)?.scaled(real(1.0 / c)),
        ];
        GridFunction::stack(&comps)
    };
    let (vp, v0, vn) = (covariant(prev)?, covariant(cur)?, covariant(next)?);
    let d0 = vn.axpy(real(-1.0), &vp)?.scaled(real(1.0 / (2.0 * dt * c)));
    let d1 = v0.derivative(1)?;
    let g = kg_gammas();
    let apply = |m: &DMatrix<C64>, f: &GridFunction| MatrixOperator::from_constant(m)?.apply(f);
    let r = apply(g.gamma(0), &d0)?
        .axpy(real(1.0), &apply(g.gamma(1), &d1)?)?
        .scaled(I * hb)
        .axpy(real(-params.mass * c), &v0)?;
    Ok(r.norm())
}

/// Curl part of the Maxwell equations for `(E_y, E_z, H_y, H_z)`:
/// `∂_t E = c∇×H`, `∂_t H = −c∇×E`.
pub fn maxwell_hamiltonian(params: &PhysicalParams) -> Result<HamiltonianFactory> {
    check_params(params)?;
    let ihc = I * params.hbar * params.c;
    let d = GridOperator::Derivative(1);
    let mut h = MatrixOperator::zero(4);
    h.set_entry(0, 3, d.scaled(-ihc));
    h.set_entry(1, 2, d.scaled(ihc));
    h.set_entry(2, 1, d.scaled(ihc));
    h.set_entry(3, 0, d.scaled(-ihc));
    Ok(HamiltonianFactory::fixed(HamiltonianKind::Maxwell, h, params.hbar))
}

/// `Σ (|E|² + |H|²)·h`.
pub fn maxwell_energy(fields: &GridFunction) -> f64 {
    fields.norm().powi(2)
}

/// Block-diagonal composite of several Hamiltonians sharing ħ.
pub fn block_diag_hamiltonian(parts: &[HamiltonianFactory]) -> Result<HamiltonianFactory> {
    let first = parts.first().ok_or_else(|| Error::Empty("block-diagonal Hamiltonian parts".into()))?;
    if parts.len() == 1 {
        return Ok(first.clone());
    }
    let hbar = first.hbar();
    if let Some(bad) = parts.iter().find(|p| p.hbar() != hbar) {
        return Err(Error::InvalidParameter(format!(
            "block parts disagree on hbar ({} vs {})",
            hbar,
            bad.hbar()
        )));
    }
    let parts = parts.to_vec();
    let dimension = parts.iter().map(HamiltonianFactory::dimension).sum();
    let time_independent = parts.iter().all(HamiltonianFactory::is_time_independent);
    Ok(HamiltonianFactory::new(HamiltonianKind::BlockDiag, dimension, hbar, time_independent, move |t, grid| {
        let ops = parts.iter().map(|p| p.at(t, grid)).collect::<Result<Vec<_>>>()?;
        MatrixOperator::block_diag(&ops)
    }))
}

/// `Q = i∫(φ*∂_tφ − φ∂_tφ*)dx` for a canonical `(φ, ∂φ/∂t)` state.
pub fn kg_charge(state: &GridFunction) -> Result<f64> {
    if state.components() != 2 {
        return Err(Error::ComponentMismatch {
            expected: 2,
            found: state.components(),
        });
    }
    let h = state.grid().spacing();
    let s: f64 = state
        .component(0)
        .iter()
        .zip(state.component(1))
        .map(|(f, ft)| (f.conj() * ft).im)
        .sum();
    Ok(-2.0 * h * s)
}
