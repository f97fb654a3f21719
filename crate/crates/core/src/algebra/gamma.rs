//! Dirac γ-matrices (standard representation) and the 5×5 Γ-matrices of the
//! first-order Klein-Gordon system.

use nalgebra::DMatrix;

use super::operator::MatrixOperator;
use crate::error::{Error, Result};
use crate::C64;

/// Minkowski metric `diag(1, −1, −1, −1)`.
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Four `d×d` matrices indexed by a spacetime index μ = 0..3.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSet {
    dimension: usize,
    gammas: [DMatrix<C64>; 4],
}

impl GammaSet {
    pub fn new(gammas: [DMatrix<C64>; 4]) -> Result<Self> {
        let d = gammas[0].nrows();
        for g in &gammas {
            if g.nrows() != d || g.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: g.nrows().max(g.ncols()),
                });
            }
        }
        Ok(Self { dimension: d, gammas })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn gamma(&self, mu: usize) -> &DMatrix<C64> {
        &self.gammas[mu]
    }

    pub fn gammas(&self) -> &[DMatrix<C64>; 4] {
        &self.gammas
    }

    /// `α^i = γ^0 γ^i`.
    pub fn alpha(&self, i: usize) -> DMatrix<C64> {
        &self.gammas[0] * &self.gammas[i]
    }

    /// `β = γ^0`.
    pub fn beta(&self) -> &DMatrix<C64> {
        &self.gammas[0]
    }

    /// Mutable access for perturbation experiments.
    pub fn gamma_mut(&mut self, mu: usize) -> &mut DMatrix<C64> {
        &mut self.gammas[mu]
    }
}

/// Pauli matrices σ₁, σ₂, σ₃.
pub fn pauli() -> [DMatrix<C64>; 3] {
    let z = c(0.0, 0.0);
    [
        DMatrix::from_row_slice(2, 2, &[z, c(1.0, 0.0), c(1.0, 0.0), z]),
        DMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, c(-1.0, 0.0)]),
    ]
}

/// Dirac representation: `γ⁰ = diag(1, 1, −1, −1)`, `γ^i = [[0, σ_i], [−σ_i, 0]]`.
pub fn dirac_gammas() -> GammaSet {
    let mut g0 = DMatrix::zeros(4, 4);
    for (j, s) in [1.0, 1.0, -1.0, -1.0].into_iter().enumerate() {
        g0[(j, j)] = c(s, 0.0);
    }
    let spatial = pauli().map(|sigma| {
        let mut g = DMatrix::zeros(4, 4);
        g.view_mut((0, 2), (2, 2)).copy_from(&sigma);
        g.view_mut((2, 0), (2, 2)).copy_from(&(-sigma));
        g
    });
    let [g1, g2, g3] = spatial;
    GammaSet {
        dimension: 4,
        gammas: [g0, g1, g2, g3],
    }
}

/// `(Γ^μ)^i_j = 1` at `(μ, 4)`, `η_μμ` at `(4, μ)`, zero elsewhere.
pub fn kg_gammas() -> GammaSet {
    let gammas = std::array::from_fn(|mu| {
        let mut g = DMatrix::zeros(5, 5);
        g[(mu, 4)] = c(1.0, 0.0);
        g[(4, mu)] = c(METRIC[mu], 0.0);
        g
    });
    GammaSet { dimension: 5, gammas }
}

/// `max_{μ,ν} ‖γ^μγ^ν + γ^νγ^μ − 2η^{μν}·Id‖_max`.
pub fn anticommutator_defect(set: &GammaSet) -> f64 {
    let d = set.dimension;
    let mut worst = 0.0f64;
    for mu in 0..4 {
        for nu in 0..4 {
            let mut ac = set.gamma(mu) * set.gamma(nu) + set.gamma(nu) * set.gamma(mu);
            if mu == nu {
                for j in 0..d {
                    ac[(j, j)] -= c(2.0 * METRIC[mu], 0.0);
                }
            }
            worst = worst.max(ac.iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
    }
    worst
}

/// `Σ_μ γ^μ ⊙ a_μ` for operator-valued components.
pub fn slashed_contract(set: &GammaSet, components: &[MatrixOperator; 4]) -> Result<MatrixOperator> {
    let d = set.dimension;
    let mut acc = MatrixOperator::zero(d);
    for (mu, a) in components.iter().enumerate() {
        if a.dimension() != d {
            return Err(Error::ComponentMismatch {
                expected: d,
                found: a.dimension(),
            });
        }
        let g = MatrixOperator::from_constant(set.gamma(mu))?;
        acc = acc.add(&g.odot(a)?)?;
    }
    Ok(acc)
}

/// `Σ_μ γ^μ a_μ` for constant matrix components.
pub fn slashed_matrix(set: &GammaSet, components: &[DMatrix<C64>; 4]) -> Result<DMatrix<C64>> {
    let d = set.dimension;
    let mut acc = DMatrix::zeros(d, d);
    for (mu, a) in components.iter().enumerate() {
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::ComponentMismatch {
                expected: d,
                found: a.nrows(),
            });
        }
        acc += set.gamma(mu) * a;
    }
    Ok(acc)
}

/// `γ^μ A_μ` for scalar (covariant) components `A_μ`.
pub fn slashed_scalars(set: &GammaSet, components: [f64; 4]) -> DMatrix<C64> {
    let mut acc = DMatrix::zeros(set.dimension, set.dimension);
    for (mu, a) in components.iter().enumerate() {
        acc += set.gamma(mu) * c(*a, 0.0);
    }
    acc
}
