//! Retarded Green kernels on the lattice and their equivalence with the
//! evolution operator.
//!
//! A kernel `g(x', x)` between the slices `t'` and `t` is stored as a dense
//! matrix on the flattened state space, so that the integral `∫dx` becomes
//! `h·Σ_x`. Kernels vanish for `t' ≤ t`.

mod born;
mod kg;

use std::fmt;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};

use crate::algebra::dirac_gammas;
use crate::bundle::{PathSampling, Trivialization};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionProblem, DENSE_LIMIT};
use crate::grid::{GridFunction, SpatialGrid1D};
use crate::reduction::HamiltonianFactory;
use crate::C64;

pub use born::born_series_green;
pub use kg::{kg_green_vector, kg_scalar_kernel, kg_scalar_slices};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Equation {
    Schrodinger,
    Dirac,
    KleinGordon,
}

impl Equation {
    pub fn label(&self) -> &'static str {
        match self {
            Equation::Schrodinger => "schrodinger",
            Equation::Dirac => "dirac",
            Equation::KleinGordon => "kg",
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Spectrum and orthonormal eigenstates of a static Hermitian Hamiltonian.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    grid: SpatialGrid1D,
    components: usize,
    hbar: f64,
    energies: Vec<f64>,
    vectors: DMatrix<C64>,
}

/// Dense Hermitian eigensolve of `H` on the flattened state space.
pub fn eigenbasis(h: &HamiltonianFactory, grid: &SpatialGrid1D) -> Result<EigenBasis> {
    if !h.is_time_independent() {
        return Err(Error::TimeDependent);
    }
    let d = h.dimension() * grid.len();
    if d > DENSE_LIMIT {
        return Err(Error::TooLarge {
            dimension: d,
            limit: DENSE_LIMIT,
        });
    }
    let defect = h.hermiticity_defect(0.0, grid)?;
    if defect > 1e-10 {
        return Err(Error::NotHermitian { defect });
    }
    let m = h.dense(0.0, grid)?;
    let sym = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&a| eig.eigenvalues[a]).collect();
    let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenBasis {
        grid: grid.clone(),
        components: h.dimension(),
        hbar: h.hbar(),
        energies,
        vectors,
    })
}

impl EigenBasis {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn grid(&self) -> &SpatialGrid1D {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Ascending eigenvalues.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `ψ_a`, normalized so that `h·Σ|ψ_a|² = 1`.
    pub fn state(&self, a: usize) -> GridFunction {
        let v = self.vectors.column(a) / C64::new(self.grid.spacing().sqrt(), 0.0);
        GridFunction::from_vector(&self.grid, self.components, &v.into_owned()).expect("basis shape is fixed")
    }

    /// `max |⟨ψ_a|ψ_b⟩ − δ_ab|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let d = self.len();
        max_abs(&(self.vectors.adjoint() * &self.vectors - DMatrix::<C64>::identity(d, d)))
    }

    /// `max |h·Σ_a ψ_a(x')ψ_a*(x) − δ_{x'x}|`.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.len();
        max_abs(&(&self.vectors * self.vectors.adjoint() - DMatrix::<C64>::identity(d, d)))
    }

    /// `Σ_a v_a e^{−iE_aτ/ħ} v_a†` on the flattened space.
    fn propagator(&self, tau: f64) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (a, e) in self.energies.iter().enumerate() {
            let phase = C64::new(0.0, -e * tau / self.hbar).exp();
            for v in scaled.column_mut(a).iter_mut() {
                *v *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `γ⁰` acting on the spinor index of the flattened Dirac state.
pub(crate) fn gamma0_flat(n: usize) -> DMatrix<C64> {
    let g0 = dirac_gammas().gamma(0).clone();
    let mut out = DMatrix::zeros(4 * n, 4 * n);
    for a in 0..4 {
        for b in 0..4 {
            if g0[(a, b)] != C64::new(0.0, 0.0) {
                for j in 0..n {
                    out[(a * n + j, b * n + j)] = g0[(a, b)];
                }
            }
        }
    }
    out
}

/// A retarded kernel between the slices `t'` (rows) and `t` (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct GreenKernel {
    t_prime: f64,
    t: f64,
    equation: Equation,
    grid: SpatialGrid1D,
    input_components: usize,
    output_components: usize,
    hbar: f64,
    c: f64,
    matrix: DMatrix<C64>,
}

impl GreenKernel {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        equation: Equation,
        grid: &SpatialGrid1D,
        input_components: usize,
        output_components: usize,
        hbar: f64,
        c: f64,
        t_prime: f64,
        t: f64,
        matrix: DMatrix<C64>,
    ) -> Self {
        let n = grid.len();
        let matrix = if t_prime > t {
            matrix
        } else {
            DMatrix::zeros(output_components * n, input_components * n)
        };
        Self {
            t_prime,
            t,
            equation,
            grid: grid.clone(),
            input_components,
            output_components,
            hbar,
            c,
            matrix,
        }
    }

    pub fn equation(&self) -> Equation {
        self.equation
    }

    /// `(t', t)`.
    pub fn times(&self) -> (f64, f64) {
        (self.t_prime, self.t)
    }

    pub fn grid(&self) -> &SpatialGrid1D {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Components of the state the kernel acts on.
    pub fn input_components(&self) -> usize {
        self.input_components
    }

    pub fn output_components(&self) -> usize {
        self.output_components
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|v| *v == C64::new(0.0, 0.0))
    }

    /// `max |self − other|`.
    pub fn max_abs_diff(&self, other: &GreenKernel) -> Result<f64> {
        if self.matrix.shape() != other.matrix.shape() {
            return Err(Error::IncompatibleKernel(format!(
                "kernel shapes {:?} and {:?} differ",
                self.matrix.shape(),
                other.matrix.shape()
            )));
        }
        Ok(max_abs(&(&self.matrix - &other.matrix)))
    }

    /// `iħh·G(t₂,t₁)·[γ⁰]·G(t₁,t₀)`, the kernel analogue of `U(t₂,t₀) = U(t₂,t₁)U(t₁,t₀)`.
    pub fn compose(&self, earlier: &GreenKernel) -> Result<GreenKernel> {
        if self.equation != earlier.equation || self.equation == Equation::KleinGordon {
            return Err(Error::IncompatibleKernel(format!(
                "cannot chain {} and {} kernels",
                self.equation, earlier.equation
            )));
        }
        self.grid.check_same(&earlier.grid)?;
        if (self.t - earlier.t_prime).abs() > 1e-12 * self.t.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "kernel slices do not meet: ({}, {}) after ({}, {})",
                self.t_prime, self.t, earlier.t_prime, earlier.t
            )));
        }
        let weight = C64::new(0.0, self.hbar * self.grid.spacing());
        let mut m = &self.matrix * weight;
        if self.equation == Equation::Dirac {
            m *= gamma0_flat(self.grid.len());
        }
        Ok(GreenKernel::assemble(
            self.equation,
            &self.grid,
            earlier.input_components,
            self.output_components,
            self.hbar,
            self.c,
            self.t_prime,
            earlier.t,
            m * &earlier.matrix,
        ))
    }

    /// Writes `t_prime,t,row,col,re,im` rows for every entry.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "t_prime,t,row,col,re,im")?;
        for r in 0..self.matrix.nrows() {
            for c in 0..self.matrix.ncols() {
                let v = self.matrix[(r, c)];
                writeln!(out, "{},{},{},{},{:e},{:e}", self.t_prime, self.t, r, c, v.re, v.im)?;
            }
        }
        Ok(())
    }
}

fn expansion_kernel(basis: &EigenBasis, equation: Equation, t_prime: f64, t: f64) -> GreenKernel {
    let n = basis.grid.len();
    let m = basis.components;
    let matrix = if t_prime > t {
        let scale = C64::new(0.0, basis.hbar * basis.grid.spacing()).inv();
        let mut g = basis.propagator(t_prime - t) * scale;
        if equation == Equation::Dirac {
            g *= gamma0_flat(n);
        }
        g
    } else {
        DMatrix::zeros(m * n, m * n)
    };
    GreenKernel::assemble(equation, &basis.grid, m, m, basis.hbar, 1.0, t_prime, t, matrix)
}

/// `g(x',x) = (1/iħ)·θ(t'−t)·Σ_a ψ_a(x')ψ_a*(x)·e^{−iE_a(t'−t)/ħ}`.
pub fn retarded_green_schrodinger(basis: &EigenBasis, t_prime: f64, t: f64) -> GreenKernel {
    expansion_kernel(basis, Equation::Schrodinger, t_prime, t)
}

/// Dirac kernel `g = (1/iħ)·θ(t'−t)·Σ_a ψ_a(x')ψ_a†(x)e^{−iE_a(t'−t)/ħ}·γ⁰`,
/// so that `iħ∫dx g γ⁰ψ` is the evolved spinor.
pub fn retarded_green_dirac(basis: &EigenBasis, t_prime: f64, t: f64) -> Result<GreenKernel> {
    if basis.components != 4 {
        return Err(Error::ComponentMismatch {
            expected: 4,
            found: basis.components,
        });
    }
    Ok(expansion_kernel(basis, Equation::Dirac, t_prime, t))
}

/// Kernel read off a time-stepped evolution operator:
/// `g = U(t',t)/(iħh)`, times `γ⁰` for Dirac.
pub fn green_from_evolution(problem: &EvolutionProblem, equation: Equation, t_prime: f64, t: f64) -> Result<GreenKernel> {
    let m = problem.components();
    let grid = problem.grid();
    let hbar = problem.factory().hbar();
    match equation {
        Equation::KleinGordon => {
            return Err(Error::IncompatibleKernel(
                "use kg_scalar_kernel for Klein-Gordon kernels".into(),
            ))
        }
        Equation::Dirac if m != 4 => {
            return Err(Error::ComponentMismatch { expected: 4, found: m });
        }
        _ => {}
    }
    if t_prime <= t {
        return Ok(GreenKernel::assemble(equation, grid, m, m, hbar, 1.0, t_prime, t, DMatrix::zeros(0, 0)));
    }
    let u = problem.evolution_operator(t_prime, t)?;
    let mut g = u.into_matrix() * C64::new(0.0, hbar * grid.spacing()).inv();
    if equation == Equation::Dirac {
        g *= gamma0_flat(grid.len());
    }
    Ok(GreenKernel::assemble(equation, grid, m, m, hbar, 1.0, t_prime, t, g))
}

/// `ψ(t') = iħ·h·Σ_x g(x',x)·[γ⁰]·ψ(x)`, or `h·Σ_x 𝗀ᵀ·(φ, ∂₀φ)` for the
/// two-component Klein-Gordon kernel.
pub fn propagate_via_green(g: &GreenKernel, psi: &GridFunction) -> Result<GridFunction> {
    if g.t_prime <= g.t {
        return Err(Error::NotRetarded {
            t_prime: g.t_prime,
            t: g.t,
        });
    }
    g.grid.check_same(psi.grid())?;
    if psi.components() != g.input_components {
        return Err(Error::ComponentMismatch {
            expected: g.input_components,
            found: psi.components(),
        });
    }
    let h = g.grid.spacing();
    let n = g.grid.len();
    let v = psi.to_vector();
    let out: DVector<C64> = match g.equation {
        Equation::Schrodinger => &g.matrix * v * C64::new(0.0, g.hbar * h),
        Equation::Dirac => &g.matrix * (gamma0_flat(n) * v) * C64::new(0.0, g.hbar * h),
        Equation::KleinGordon => {
            if g.input_components != 2 {
                return Err(Error::IncompatibleKernel(
                    "scalar Klein-Gordon kernel: build the two-component kernel with kg_green_vector".into(),
                ));
            }
            let mut w = v;
            for j in n..2 * n {
                w[j] /= C64::new(g.c, 0.0);
            }
            &g.matrix * w * C64::new(h, 0.0)
        }
    };
    GridFunction::from_vector(&g.grid, g.output_components, &out)
}

/// Green morphism `G_γ(x',x) = l_{γ(t')}⁻¹·g(x',x)·l_{γ(t)}` on the flattened
/// state space, together with the fibre weight `G⁰(γ(t)) = l⁻¹γ⁰l` for Dirac.
#[derive(Clone, Debug)]
pub struct GreenMorphism {
    kernel: GreenKernel,
    weight: Option<DMatrix<C64>>,
}

pub fn green_morphism(g: &GreenKernel, l: &Trivialization, path: &PathSampling) -> Result<GreenMorphism> {
    if g.equation == Equation::KleinGordon {
        return Err(Error::IncompatibleKernel("Green morphisms are built for square kernels".into()));
    }
    let n = g.grid.len();
    let d = g.input_components * n;
    let l = if l.dimension() == d {
        l.clone()
    } else if l.dimension() == g.input_components {
        l.over_grid(&g.grid)
    } else {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: l.dimension(),
        });
    };
    let (tp, t) = (g.t_prime, g.t);
    let at = |s: f64| crate::bundle::BasePoint::new(s, path.position(s));
    let lt = l.at(at(t))?;
    let lt_inv = l.inverse_at(at(t))?;
    let matrix = l.inverse_at(at(tp))? * &g.matrix * &lt;
    let weight = (g.equation == Equation::Dirac).then(|| lt_inv * gamma0_flat(n) * lt);
    let mut kernel = g.clone();
    kernel.matrix = matrix;
    Ok(GreenMorphism { kernel, weight })
}

impl GreenMorphism {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.kernel.matrix
    }

    /// `Ψ_γ(t') = iħ·h·Σ_x G_γ(x',x)·[G⁰]·Ψ_γ(x)` for a lifting given on the
    /// flattened state space.
    pub fn propagate(&self, lifting: &DVector<C64>) -> Result<DVector<C64>> {
        let k = &self.kernel;
        if k.t_prime <= k.t {
            return Err(Error::NotRetarded {
                t_prime: k.t_prime,
                t: k.t,
            });
        }
        if lifting.len() != k.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: k.matrix.ncols(),
                found: lifting.len(),
            });
        }
        let v = match &self.weight {
            Some(w) => w * lifting,
            None => lifting.clone(),
        };
        Ok(&k.matrix * v * C64::new(0.0, k.hbar * k.grid.spacing()))
    }
}
