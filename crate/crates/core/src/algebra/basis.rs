//! Point-dependent frames and the matrix of a matrix operator in such a frame.

use nalgebra::DMatrix;

use super::operator::{GridOperator, MatrixOperator};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, SpatialGrid1D};
use crate::C64;

/// Basis `{f_α(x_j)}` given column-wise as invertible matrices per grid point.
#[derive(Clone, Debug)]
pub struct Frame {
    grid: SpatialGrid1D,
    matrices: Vec<DMatrix<C64>>,
    inverses: Vec<DMatrix<C64>>,
}

impl Frame {
    pub fn new(grid: &SpatialGrid1D, matrices: Vec<DMatrix<C64>>) -> Result<Self> {
        if matrices.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: matrices.len(),
            });
        }
        let n = matrices[0].nrows();
        let mut inverses = Vec::with_capacity(matrices.len());
        for (j, m) in matrices.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.nrows().max(m.ncols()),
                });
            }
            let inv = m.clone().try_inverse().ok_or_else(|| Error::Singular {
                context: format!("frame at grid point {j} (x = {})", grid.coordinate(j)),
            })?;
            inverses.push(inv);
        }
        Ok(Self {
            grid: grid.clone(),
            matrices,
            inverses,
        })
    }

    /// Standard (constant identity) frame.
    pub fn standard(grid: &SpatialGrid1D, n: usize) -> Self {
        let id = DMatrix::identity(n, n);
        Self {
            grid: grid.clone(),
            matrices: vec![id.clone(); grid.len()],
            inverses: vec![id; grid.len()],
        }
    }

    pub fn from_fn(grid: &SpatialGrid1D, f: impl Fn(f64) -> DMatrix<C64>) -> Result<Self> {
        Self::new(grid, grid.coordinates().into_iter().map(f).collect())
    }

    pub fn dimension(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn grid(&self) -> &SpatialGrid1D {
        &self.grid
    }

    pub fn matrices(&self) -> &[DMatrix<C64>] {
        &self.matrices
    }

    /// `f(x)` as a multiplication matrix operator.
    pub fn operator(&self) -> MatrixOperator {
        MatrixOperator::pointwise(&self.matrices).expect("frame matrices validated at construction")
    }

    /// `f⁻¹(x)` as a multiplication matrix operator.
    pub fn inverse_operator(&self) -> MatrixOperator {
        MatrixOperator::pointwise(&self.inverses).expect("frame matrices validated at construction")
    }

    /// Components of `ψ` in this frame: `f⁻¹(x)ψ(x)`.
    pub fn components_of(&self, psi: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(psi.grid())?;
        self.inverse_operator().apply(psi)
    }

    /// `E(x) = f⁻¹(x)·∂_x f(x)`, with ∂_x taken by the grid's scheme.
    pub fn connection(&self) -> Result<Vec<DMatrix<C64>>> {
        let n = self.dimension();
        let npts = self.grid.len();
        let mut derivs = vec![DMatrix::zeros(n, n); npts];
        for r in 0..n {
            for c in 0..n {
                let samples: Vec<C64> = self.matrices.iter().map(|m| m[(r, c)]).collect();
                let d = self.grid.differentiate(&samples, 1)?;
                for (j, v) in d.into_iter().enumerate() {
                    derivs[j][(r, c)] = v;
                }
            }
        }
        Ok(self
            .inverses
            .iter()
            .zip(derivs)
            .map(|(inv, d)| inv * d)
            .collect())
    }
}

/// Matrix of `B` in the frame `f`: `𝐁 = f⁻¹ ⊙ B ⊙ f`, so that
/// `𝐁·(components of ψ) = components of Bψ`.
pub fn matrix_in_basis(op: &MatrixOperator, frame: &Frame) -> Result<MatrixOperator> {
    if op.dimension() != frame.dimension() {
        return Err(Error::ComponentMismatch {
            expected: frame.dimension(),
            found: op.dimension(),
        });
    }
    frame.inverse_operator().odot(op)?.odot(&frame.operator())
}

/// `Id·∂_x + E(x)`, the closed form of the matrix of `Id·∂_x` in `frame`.
pub fn derivative_in_basis(frame: &Frame) -> Result<MatrixOperator> {
    let e = MatrixOperator::pointwise(&frame.connection()?)?;
    MatrixOperator::diagonal(frame.dimension(), GridOperator::Derivative(1)).add(&e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> SpatialGrid1D {
        SpatialGrid1D::periodic(32, 2.0 * PI).unwrap()
    }

    fn rotating_frame(g: &SpatialGrid1D) -> Frame {
        Frame::from_fn(g, |x| {
            let (s, co) = x.sin_cos();
            DMatrix::from_row_slice(2, 2, &[
                C64::new(co, 0.0), C64::new(-s, 0.0),
                C64::new(s, 0.0), C64::new(co, 0.0),
            ]) * C64::new(0.0, 0.3 * x.cos()).exp()
        })
        .unwrap()
    }

    fn field(g: &SpatialGrid1D) -> GridFunction {
        GridFunction::from_fn(g, 2, |a, x| C64::new((x + a as f64).cos(), (2.0 * x).sin()))
    }

    #[test]
    fn standard_frame_reproduces_operator() {
        let g = grid();
        let b = MatrixOperator::from_fn(2, |r, c| {
            if r == c { GridOperator::Laplacian } else { GridOperator::Derivative(1).scaled(0.5) }
        });
        let bb = matrix_in_basis(&b, &Frame::standard(&g, 2)).unwrap();
        let psi = field(&g);
        assert!(bb.apply(&psi).unwrap().max_abs_diff(&b.apply(&psi).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn unit_matrix_stays_unit() {
        let g = grid();
        let frame = rotating_frame(&g);
        let one = matrix_in_basis(&MatrixOperator::identity(2), &frame).unwrap();
        let psi = field(&g);
        assert!(one.apply(&psi).unwrap().max_abs_diff(&psi).unwrap() < 1e-13);
    }

    #[test]
    fn components_transform_covariantly() {
        let g = grid();
        let frame = rotating_frame(&g);
        let b = MatrixOperator::from_fn(2, |r, c| match (r, c) {
            (0, 0) => GridOperator::Derivative(1),
            (1, 0) => GridOperator::scale(C64::new(0.0, 2.0)),
            (1, 1) => GridOperator::Laplacian,
            _ => GridOperator::Zero,
        });
        let bb = matrix_in_basis(&b, &frame).unwrap();
        let psi = field(&g);
        let lhs = bb.apply(&frame.components_of(&psi).unwrap()).unwrap();
        let rhs = frame.components_of(&b.apply(&psi).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn derivative_picks_up_frame_connection() {
        let g = grid();
        let frame = rotating_frame(&g);
        let d = MatrixOperator::diagonal(2, GridOperator::Derivative(1));
        let via_basis = matrix_in_basis(&d, &frame).unwrap();
        let closed = derivative_in_basis(&frame).unwrap();
        // low-mode fields keep the discrete product rule exact
        let u = GridFunction::from_fn(&g, 2, |a, x| C64::new(x.cos() * (a + 1) as f64, 0.2 * x.sin()));
        let diff = via_basis.apply(&u).unwrap().max_abs_diff(&closed.apply(&u).unwrap()).unwrap();
        assert!(diff < 1e-9, "diff {diff}");
    }

    #[test]
    fn singular_frame_reports_point() {
        let g = grid();
        let err = Frame::from_fn(&g, |x| {
            let s = if x > 1.0 && x < 1.3 { 0.0 } else { 1.0 };
            DMatrix::from_diagonal_element(2, 2, C64::new(s, 0.0))
        })
        .unwrap_err();
        match err {
            Error::Singular { context } => assert!(context.contains("grid point 6")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
