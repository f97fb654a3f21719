//! Scalar grid operators and the square matrices of them ("matrix operators")
//! that act on multi-component grid functions.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, SpatialGrid1D};
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Tag describing the shape of a [`GridOperator`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Zero,
    Identity,
    ScaleByFunction,
    Derivative(u8),
    Laplacian,
    Composition,
    Sum,
}

/// A linear map from one scalar grid component to another.
///
/// Derivatives stay symbolic until applied; the grid decides the scheme
/// (spectral on periodic grids, central differences otherwise).
#[derive(Clone, Debug, PartialEq)]
pub enum GridOperator {
    Zero,
    Identity,
    /// Multiplication by a constant.
    Scale(C64),
    /// Pointwise multiplication by sampled values.
    Multiply(Arc<[C64]>),
    Derivative(u8),
    Laplacian,
    /// `ops[0] ∘ ops[1] ∘ …`; the last entry acts first.
    Compose(Vec<GridOperator>),
    Sum(Vec<GridOperator>),
}

impl GridOperator {
    pub fn scale(c: impl Into<C64>) -> Self {
        let c = c.into();
        if c == ZERO {
            GridOperator::Zero
        } else if c == ONE {
            GridOperator::Identity
        } else {
            GridOperator::Scale(c)
        }
    }

    pub fn multiply(samples: impl Into<Arc<[C64]>>) -> Self {
        let samples = samples.into();
        if samples.iter().all(|v| *v == ZERO) {
            GridOperator::Zero
        } else {
            GridOperator::Multiply(samples)
        }
    }

    pub fn multiply_real(samples: &[f64]) -> Self {
        Self::multiply(samples.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>())
    }

    pub fn derivative(order: u8) -> Self {
        GridOperator::Derivative(order)
    }

    pub fn kind(&self) -> OperatorKind {
        match self {
            GridOperator::Zero => OperatorKind::Zero,
            GridOperator::Identity => OperatorKind::Identity,
            GridOperator::Scale(_) | GridOperator::Multiply(_) => OperatorKind::ScaleByFunction,
            GridOperator::Derivative(k) => OperatorKind::Derivative(*k),
            GridOperator::Laplacian => OperatorKind::Laplacian,
            GridOperator::Compose(_) => OperatorKind::Composition,
            GridOperator::Sum(_) => OperatorKind::Sum,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, GridOperator::Zero)
    }

    /// `self ∘ other` with light algebraic simplification.
    pub fn compose(&self, other: &GridOperator) -> GridOperator {
        use GridOperator::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (Identity, b) => b.clone(),
            (a, Identity) => a.clone(),
            (Scale(a), Scale(b)) => GridOperator::scale(a * b),
            (Scale(a), Multiply(f)) | (Multiply(f), Scale(a)) => {
                GridOperator::multiply(f.iter().map(|v| v * a).collect::<Vec<_>>())
            }
            (Multiply(f), Multiply(g)) if f.len() == g.len() => {
                GridOperator::multiply(f.iter().zip(g.iter()).map(|(a, b)| a * b).collect::<Vec<_>>())
            }
            (Scale(a), Compose(ops)) if matches!(ops.first(), Some(Scale(_))) => {
                let Some(Scale(b)) = ops.first() else { unreachable!() };
                let mut rest = ops.clone();
                rest[0] = GridOperator::scale(a * b);
                simplify_compose(rest)
            }
            (a, b) => {
                let mut ops = Vec::new();
                for op in [a, b] {
                    match op {
                        Compose(inner) => ops.extend(inner.iter().cloned()),
                        other => ops.push(other.clone()),
                    }
                }
                simplify_compose(ops)
            }
        }
    }

    pub fn plus(&self, other: &GridOperator) -> GridOperator {
        use GridOperator::*;
        match (self, other) {
            (Zero, b) => b.clone(),
            (a, Zero) => a.clone(),
            (Scale(a), Scale(b)) => GridOperator::scale(a + b),
            (Identity, Scale(b)) | (Scale(b), Identity) => GridOperator::scale(ONE + b),
            (Identity, Identity) => GridOperator::scale(2.0),
            (Multiply(f), Multiply(g)) if f.len() == g.len() => {
                GridOperator::multiply(f.iter().zip(g.iter()).map(|(a, b)| a + b).collect::<Vec<_>>())
            }
            (a, b) => {
                let mut terms = Vec::new();
                for op in [a, b] {
                    match op {
                        Sum(inner) => terms.extend(inner.iter().cloned()),
                        other => terms.push(other.clone()),
                    }
                }
                Sum(terms)
            }
        }
    }

    pub fn scaled(&self, c: impl Into<C64>) -> GridOperator {
        GridOperator::scale(c).compose(self)
    }

    /// Applies the operator to one scalar component.
    pub fn apply(&self, grid: &SpatialGrid1D, samples: &[C64]) -> Result<Vec<C64>> {
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: samples.len(),
            });
        }
        Ok(match self {
            GridOperator::Zero => vec![ZERO; samples.len()],
            GridOperator::Identity => samples.to_vec(),
            GridOperator::Scale(c) => samples.iter().map(|v| v * c).collect(),
            GridOperator::Multiply(f) => {
                if f.len() != samples.len() {
                    return Err(Error::DimensionMismatch {
                        expected: samples.len(),
                        found: f.len(),
                    });
                }
                f.iter().zip(samples).map(|(a, b)| a * b).collect()
            }
            GridOperator::Derivative(k) => grid.differentiate(samples, *k)?,
            GridOperator::Laplacian => grid.differentiate(samples, 2)?,
            GridOperator::Compose(ops) => {
                let mut acc = samples.to_vec();
                for op in ops.iter().rev() {
                    acc = op.apply(grid, &acc)?;
                }
                acc
            }
            GridOperator::Sum(terms) => {
                let mut acc = vec![ZERO; samples.len()];
                for t in terms {
                    for (a, b) in acc.iter_mut().zip(t.apply(grid, samples)?) {
                        *a += b;
                    }
                }
                acc
            }
        })
    }

    /// Dense `N×N` matrix of the operator on `grid`.
    pub fn to_dense(&self, grid: &SpatialGrid1D) -> Result<DMatrix<C64>> {
        let n = grid.len();
        let mut out = DMatrix::zeros(n, n);
        match self {
            GridOperator::Zero => {}
            GridOperator::Identity => out.fill_diagonal(ONE),
            GridOperator::Scale(c) => out.fill_diagonal(*c),
            GridOperator::Multiply(f) => {
                if f.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: f.len(),
                    });
                }
                for j in 0..n {
                    out[(j, j)] = f[j];
                }
            }
            _ => {
                let mut unit = vec![ZERO; n];
                for col in 0..n {
                    unit[col] = ONE;
                    let image = self.apply(grid, &unit)?;
                    unit[col] = ZERO;
                    for (row, v) in image.into_iter().enumerate() {
                        out[(row, col)] = v;
                    }
                }
            }
        }
        Ok(out)
    }
}

fn simplify_compose(ops: Vec<GridOperator>) -> GridOperator {
    let ops: Vec<_> = ops
        .into_iter()
        .filter(|op| !matches!(op, GridOperator::Identity))
        .collect();
    if ops.iter().any(GridOperator::is_zero) {
        return GridOperator::Zero;
    }
    match ops.len() {
        0 => GridOperator::Identity,
        1 => ops.into_iter().next().unwrap(),
        _ => GridOperator::Compose(ops),
    }
}

fn fmt_complex(c: &C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

impl fmt::Display for GridOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridOperator::Zero => write!(f, "0"),
            GridOperator::Identity => write!(f, "id"),
            GridOperator::Scale(c) => write!(f, "{}", fmt_complex(c)),
            GridOperator::Multiply(samples) => {
                let first = samples.first().copied().unwrap_or(ZERO);
                if samples.iter().all(|v| *v == first) {
                    write!(f, "{}", fmt_complex(&first))
                } else {
                    write!(f, "f(x)")
                }
            }
            GridOperator::Derivative(1) => write!(f, "d/dx"),
            GridOperator::Derivative(k) => write!(f, "d^{k}/dx^{k}"),
            GridOperator::Laplacian => write!(f, "lap"),
            GridOperator::Compose(ops) => {
                let parts: Vec<String> = ops.iter().map(|o| o.to_string()).collect();
                write!(f, "{}", parts.join("*"))
            }
            GridOperator::Sum(terms) => {
                let parts: Vec<String> = terms.iter().map(|o| o.to_string()).collect();
                write!(f, "({})", parts.join(" + "))
            }
        }
    }
}

/// Square array of [`GridOperator`]s acting on `n`-component fields:
/// `(Bψ)^α = Σ_β b^α_β(ψ^β)`.
#[derive(Clone, Debug)]
pub struct MatrixOperator {
    n: usize,
    entries: Vec<GridOperator>,
}

impl MatrixOperator {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> GridOperator) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                entries.push(f(r, c));
            }
        }
        Self { n, entries }
    }

    /// Row-major entries.
    pub fn from_entries(n: usize, entries: Vec<GridOperator>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(n, GridOperator::Identity)
    }

    pub fn zero(n: usize) -> Self {
        Self::from_fn(n, |_, _| GridOperator::Zero)
    }

    /// `op` on every diagonal entry.
    pub fn diagonal(n: usize, op: GridOperator) -> Self {
        Self::from_fn(n, |r, c| if r == c { op.clone() } else { GridOperator::Zero })
    }

    /// Promotes a constant matrix `C` to the operator `[c^α_β · id]`.
    pub fn from_constant(c: &DMatrix<C64>) -> Result<Self> {
        if !c.is_square() {
            return Err(Error::DimensionMismatch {
                expected: c.nrows(),
                found: c.ncols(),
            });
        }
        Ok(Self::from_fn(c.nrows(), |r, col| GridOperator::scale(c[(r, col)])))
    }

    /// Pointwise matrix field `M(x_j)` as a matrix of multiplication operators.
    pub fn pointwise(fields: &[DMatrix<C64>]) -> Result<Self> {
        let first = fields.first().ok_or_else(|| Error::Empty("pointwise matrix field".into()))?;
        let n = first.nrows();
        for m in fields {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.nrows().max(m.ncols()),
                });
            }
        }
        Ok(Self::from_fn(n, |r, c| {
            let samples: Vec<C64> = fields.iter().map(|m| m[(r, c)]).collect();
            let v0 = samples[0];
            if samples.iter().all(|v| *v == v0) {
                GridOperator::scale(v0)
            } else {
                GridOperator::multiply(samples)
            }
        }))
    }

    /// Block-diagonal composite of several operators.
    pub fn block_diag(parts: &[MatrixOperator]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Empty("block-diagonal parts".into()));
        }
        let n: usize = parts.iter().map(|p| p.n).sum();
        let mut out = Self::zero(n);
        let mut offset = 0;
        for p in parts {
            for r in 0..p.n {
                for c in 0..p.n {
                    out.entries[(offset + r) * n + offset + c] = p.entry(r, c).clone();
                }
            }
            offset += p.n;
        }
        Ok(out)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> &GridOperator {
        &self.entries[row * self.n + col]
    }

    pub fn set_entry(&mut self, row: usize, col: usize, op: GridOperator) {
        self.entries[row * self.n + col] = op;
    }

    pub fn entries(&self) -> &[GridOperator] {
        &self.entries
    }

    pub fn apply(&self, psi: &GridFunction) -> Result<GridFunction> {
        if psi.components() != self.n {
            return Err(Error::ComponentMismatch {
                expected: self.n,
                found: psi.components(),
            });
        }
        let grid = psi.grid();
        let npts = grid.len();
        let mut out = vec![ZERO; self.n * npts];
        for alpha in 0..self.n {
            let row = &mut out[alpha * npts..(alpha + 1) * npts];
            for beta in 0..self.n {
                let op = self.entry(alpha, beta);
                if op.is_zero() {
                    continue;
                }
                for (a, b) in row.iter_mut().zip(op.apply(grid, psi.component(beta))?) {
                    *a += b;
                }
            }
        }
        GridFunction::from_values(grid, self.n, out)
    }

    /// `(A ⊙ B)^α_β = Σ_μ a^α_μ ∘ b^μ_β`.
    pub fn odot(&self, other: &MatrixOperator) -> Result<MatrixOperator> {
        if self.n != other.n {
            return Err(Error::ComponentMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let n = self.n;
        Ok(Self::from_fn(n, |r, c| {
            (0..n).fold(GridOperator::Zero, |acc, mu| {
                acc.plus(&self.entry(r, mu).compose(other.entry(mu, c)))
            })
        }))
    }

    pub fn add(&self, other: &MatrixOperator) -> Result<MatrixOperator> {
        if self.n != other.n {
            return Err(Error::ComponentMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(Self {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.plus(b))
                .collect(),
        })
    }

    pub fn scaled(&self, c: impl Into<C64>) -> MatrixOperator {
        let c = c.into();
        Self {
            n: self.n,
            entries: self.entries.iter().map(|e| e.scaled(c)).collect(),
        }
    }

    /// Dense matrix on the flattened (component-major) state space.
    pub fn to_dense(&self, grid: &SpatialGrid1D) -> Result<DMatrix<C64>> {
        let npts = grid.len();
        let dim = self.n * npts;
        let mut out = DMatrix::zeros(dim, dim);
        for r in 0..self.n {
            for c in 0..self.n {
                let op = self.entry(r, c);
                if op.is_zero() {
                    continue;
                }
                let block = op.to_dense(grid)?;
                out.view_mut((r * npts, c * npts), (npts, npts)).copy_from(&block);
            }
        }
        Ok(out)
    }
}

impl TryFrom<&DMatrix<C64>> for MatrixOperator {
    type Error = Error;

    fn try_from(c: &DMatrix<C64>) -> Result<Self> {
        MatrixOperator::from_constant(c)
    }
}

impl fmt::Display for MatrixOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|c| self.entry(r, c).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ring() -> SpatialGrid1D {
        SpatialGrid1D::periodic(16, 2.0 * PI).unwrap()
    }

    fn sample_field(grid: &SpatialGrid1D, m: usize) -> GridFunction {
        GridFunction::from_fn(grid, m, |a, x| {
            C64::new((x + a as f64).sin(), (2.0 * x - a as f64).cos() * 0.5)
        })
    }

    #[test]
    fn identity_leaves_field_unchanged() {
        let grid = ring();
        let psi = sample_field(&grid, 3);
        let out = MatrixOperator::identity(3).apply(&psi).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn apply_rejects_component_mismatch() {
        let grid = ring();
        let psi = sample_field(&grid, 2);
        assert!(matches!(
            MatrixOperator::identity(3).apply(&psi),
            Err(Error::ComponentMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn constant_matrices_multiply_as_matrices() {
        let a = DMatrix::from_fn(3, 3, |r, c| C64::new(r as f64 + 1.0, c as f64 - 1.0));
        let b = DMatrix::from_fn(3, 3, |r, c| C64::new((r * c) as f64, 0.5));
        let prod = MatrixOperator::from_constant(&a)
            .unwrap()
            .odot(&MatrixOperator::from_constant(&b).unwrap())
            .unwrap();
        let expected = &a * &b;
        for r in 0..3 {
            for c in 0..3 {
                match prod.entry(r, c) {
                    GridOperator::Scale(v) => assert!((v - expected[(r, c)]).norm() < 1e-14),
                    GridOperator::Identity => assert!((expected[(r, c)] - ONE).norm() < 1e-14),
                    GridOperator::Zero => assert!(expected[(r, c)].norm() < 1e-14),
                    other => panic!("unexpected entry {other:?}"),
                }
            }
        }
    }

    #[test]
    fn odot_with_identity_is_neutral() {
        let grid = ring();
        let a = MatrixOperator::from_fn(2, |r, c| {
            GridOperator::Derivative(1).scaled(C64::new(r as f64 + 1.0, c as f64))
        });
        let psi = sample_field(&grid, 2);
        let lhs = a.odot(&MatrixOperator::identity(2)).unwrap().apply(&psi).unwrap();
        let rhs = MatrixOperator::identity(2).odot(&a).unwrap().apply(&psi).unwrap();
        let direct = a.apply(&psi).unwrap();
        assert!(lhs.max_abs_diff(&direct).unwrap() < 1e-12);
        assert!(rhs.max_abs_diff(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn dense_assembly_matches_application() {
        let grid = ring();
        let op = MatrixOperator::from_fn(2, |r, c| match (r, c) {
            (0, 1) => GridOperator::Derivative(1),
            (1, 0) => GridOperator::Laplacian.plus(&GridOperator::scale(2.0)),
            _ => GridOperator::multiply_real(&grid.coordinates()),
        });
        let psi = sample_field(&grid, 2);
        let dense = op.to_dense(&grid).unwrap();
        let via_dense = GridFunction::from_vector(&grid, 2, &(dense * psi.to_vector())).unwrap();
        assert!(via_dense.max_abs_diff(&op.apply(&psi).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn compose_simplifies_trivial_factors() {
        let d = GridOperator::Derivative(1);
        assert!(GridOperator::Zero.compose(&d).is_zero());
        assert!(matches!(GridOperator::Identity.compose(&d), GridOperator::Derivative(1)));
        assert!(matches!(
            GridOperator::scale(2.0).compose(&GridOperator::scale(0.5)),
            GridOperator::Identity
        ));
    }

    #[test]
    fn block_diag_places_blocks() {
        let a = MatrixOperator::identity(1);
        let b = MatrixOperator::from_fn(2, |_, _| GridOperator::Derivative(1));
        let bd = MatrixOperator::block_diag(&[a, b]).unwrap();
        assert_eq!(bd.dimension(), 3);
        assert!(bd.entry(0, 1).is_zero());
        assert!(matches!(bd.entry(2, 1), GridOperator::Derivative(1)));
        assert!(MatrixOperator::block_diag(&[]).is_err());
    }
}
