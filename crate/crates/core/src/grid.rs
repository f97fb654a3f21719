//! One-dimensional spatial lattice, multi-component grid functions and the
//! pointwise fibre products used to build inner products.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::C64;

/// Smallest admissible point count.
pub const MIN_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Ring topology; derivatives are spectral.
    Periodic,
    /// Hard walls: the field vanishes just outside `[0, L]`; derivatives are
    /// second-order central differences.
    Reflecting,
}

impl Boundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Reflecting => "reflecting",
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Uniform 1D grid. Periodic grids sample `x_j = j·L/N`, reflecting grids
/// sample `x_j = j·L/(N-1)` so that both walls are grid points.
#[derive(Clone)]
pub struct SpatialGrid1D {
    points: usize,
    length: f64,
    boundary: Boundary,
    fft: Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
}

impl fmt::Debug for SpatialGrid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpatialGrid1D")
            .field("points", &self.points)
            .field("length", &self.length)
            .field("boundary", &self.boundary)
            .finish()
    }
}

impl PartialEq for SpatialGrid1D {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
            && self.length.to_bits() == other.length.to_bits()
            && self.boundary == other.boundary
    }
}

impl SpatialGrid1D {
    pub fn new(points: usize, length: f64, boundary: Boundary) -> Result<Self> {
        if points < MIN_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_POINTS} points, got {points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid length must be positive and finite, got {length}"
            )));
        }
        let fft = match boundary {
            Boundary::Periodic => {
                let mut planner = FftPlanner::new();
                Some((
                    planner.plan_fft_forward(points),
                    planner.plan_fft_inverse(points),
                ))
            }
            Boundary::Reflecting => None,
        };
        Ok(Self {
            points,
            length,
            boundary,
            fft,
        })
    }

    pub fn periodic(points: usize, length: f64) -> Result<Self> {
        Self::new(points, length, Boundary::Periodic)
    }

    pub fn reflecting(points: usize, length: f64) -> Result<Self> {
        Self::new(points, length, Boundary::Reflecting)
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn spacing(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.length / self.points as f64,
            Boundary::Reflecting => self.length / (self.points - 1) as f64,
        }
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.coordinate(j)).collect()
    }

    /// Wavenumber `2π·mode/L` of an integer Fourier mode.
    pub fn wavenumber(&self, mode: i64) -> f64 {
        2.0 * PI * mode as f64 / self.length
    }

    /// Wavenumbers in FFT output order.
    pub fn fft_wavenumbers(&self) -> Vec<f64> {
        let n = self.points as i64;
        (0..n)
            .map(|j| {
                let mode = if j <= n / 2 { j } else { j - n };
                self.wavenumber(mode)
            })
            .collect()
    }

    /// Index of the grid point nearest to `x` (wrapped on periodic grids).
    pub fn nearest_index(&self, x: f64) -> usize {
        let h = self.spacing();
        match self.boundary {
            Boundary::Periodic => {
                let n = self.points as i64;
                ((x / h).round() as i64).rem_euclid(n) as usize
            }
            Boundary::Reflecting => {
                ((x / h).round().max(0.0) as usize).min(self.points - 1)
            }
        }
    }

    /// Discrete δ(x − x₀): `1/h` at the nearest grid point, zero elsewhere.
    pub fn delta(&self, x0: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.points];
        out[self.nearest_index(x0)] = C64::new(1.0 / self.spacing(), 0.0);
        out
    }

    /// k-th derivative of one scalar component with the grid's scheme.
    pub fn differentiate(&self, samples: &[C64], order: u8) -> Result<Vec<C64>> {
        if samples.len() != self.points {
            return Err(Error::DimensionMismatch {
                expected: self.points,
                found: samples.len(),
            });
        }
        if !(1..=2).contains(&order) {
            return Err(Error::UnsupportedOrder(order));
        }
        Ok(match &self.fft {
            Some((forward, inverse)) => {
                let mut buf = samples.to_vec();
                forward.process(&mut buf);
                let n = self.points;
                let norm = 1.0 / n as f64;
                for (j, (value, k)) in buf.iter_mut().zip(self.fft_wavenumbers()).enumerate() {
                    let factor = if order == 1 {
                        // the Nyquist mode has no odd derivative on a real grid
                        if n % 2 == 0 && j == n / 2 {
                            C64::new(0.0, 0.0)
                        } else {
                            C64::new(0.0, k)
                        }
                    } else {
                        C64::new(-k * k, 0.0)
                    };
                    *value *= factor * norm;
                }
                inverse.process(&mut buf);
                buf
            }
            None => {
                let h = self.spacing();
                let n = self.points;
                let at = |j: isize| -> C64 {
                    if j < 0 || j as usize >= n {
                        C64::new(0.0, 0.0)
                    } else {
                        samples[j as usize]
                    }
                };
                (0..n as isize)
                    .map(|j| match order {
                        1 => (at(j + 1) - at(j - 1)) / (2.0 * h),
                        _ => (at(j + 1) - 2.0 * at(j) + at(j - 1)) / (h * h),
                    })
                    .collect()
            }
        })
    }

    pub(crate) fn check_same(&self, other: &SpatialGrid1D) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// `m`-component complex field sampled on a grid. Values are stored
/// component-major: entry `(α, j)` lives at `α·N + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: SpatialGrid1D,
    components: usize,
    values: Vec<C64>,
}

impl GridFunction {
    pub fn zeros(grid: &SpatialGrid1D, components: usize) -> Self {
        Self {
            grid: grid.clone(),
            components,
            values: vec![C64::new(0.0, 0.0); components * grid.len()],
        }
    }

    pub fn from_values(grid: &SpatialGrid1D, components: usize, values: Vec<C64>) -> Result<Self> {
        if components == 0 {
            return Err(Error::InvalidParameter("grid function needs at least one component".into()));
        }
        if values.len() != components * grid.len() {
            return Err(Error::DimensionMismatch {
                expected: components * grid.len(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("grid function samples".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            components,
            values,
        })
    }

    /// Builds a field from `f(component, x)`.
    pub fn from_fn(grid: &SpatialGrid1D, components: usize, mut f: impl FnMut(usize, f64) -> C64) -> Self {
        let mut values = Vec::with_capacity(components * grid.len());
        for alpha in 0..components {
            for j in 0..grid.len() {
                values.push(f(alpha, grid.coordinate(j)));
            }
        }
        Self {
            grid: grid.clone(),
            components,
            values,
        }
    }

    /// Places the spinor `u` at every point, modulated by `profile(x)`.
    pub fn from_profile(grid: &SpatialGrid1D, u: &[C64], profile: impl Fn(f64) -> C64) -> Self {
        Self::from_fn(grid, u.len(), |alpha, x| u[alpha] * profile(x))
    }

    pub fn grid(&self) -> &SpatialGrid1D {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn component(&self, alpha: usize) -> &[C64] {
        let n = self.grid.len();
        &self.values[alpha * n..(alpha + 1) * n]
    }

    pub fn component_mut(&mut self, alpha: usize) -> &mut [C64] {
        let n = self.grid.len();
        &mut self.values[alpha * n..(alpha + 1) * n]
    }

    /// Fibre value (all components) at grid point `j`.
    pub fn point(&self, j: usize) -> Vec<C64> {
        let n = self.grid.len();
        (0..self.components).map(|a| self.values[a * n + j]).collect()
    }

    pub fn set_point(&mut self, j: usize, value: &[C64]) {
        let n = self.grid.len();
        for (a, v) in value.iter().enumerate() {
            self.values[a * n + j] = *v;
        }
    }

    /// Same grid and component count.
    pub fn check_shape(&self, other: &GridFunction) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        if self.components != other.components {
            return Err(Error::ComponentMismatch {
                expected: self.components,
                found: other.components,
            });
        }
        Ok(())
    }

    pub fn derivative(&self, order: u8) -> Result<GridFunction> {
        let mut values = Vec::with_capacity(self.values.len());
        for alpha in 0..self.components {
            values.extend(self.grid.differentiate(self.component(alpha), order)?);
        }
        Ok(Self {
            grid: self.grid.clone(),
            components: self.components,
            values,
        })
    }

    pub fn inner(&self, other: &GridFunction, fibre: &FibreProduct) -> Result<C64> {
        inner(self, other, fibre)
    }

    /// L² norm under the identity fibre product.
    pub fn norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn scaled(&self, factor: C64) -> GridFunction {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// `self + factor·other`.
    pub fn axpy(&self, factor: C64, other: &GridFunction) -> Result<GridFunction> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += factor * b;
        }
        Ok(out)
    }

    /// Largest pointwise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// L² distance under the identity fibre product.
    pub fn distance(&self, other: &GridFunction) -> Result<f64> {
        Ok(self.axpy(C64::new(-1.0, 0.0), other)?.norm())
    }

    /// Stacks several fields into one with concatenated components.
    pub fn stack(parts: &[GridFunction]) -> Result<GridFunction> {
        let first = parts.first().ok_or_else(|| Error::Empty("stack of grid functions".into()))?;
        let mut values = Vec::new();
        let mut components = 0;
        for p in parts {
            first.grid.check_same(&p.grid)?;
            components += p.components;
            values.extend_from_slice(&p.values);
        }
        Ok(Self {
            grid: first.grid.clone(),
            components,
            values,
        })
    }

    /// Extracts components `range` as a new field.
    pub fn slice_components(&self, start: usize, count: usize) -> Result<GridFunction> {
        if start + count > self.components || count == 0 {
            return Err(Error::ComponentMismatch {
                expected: start + count,
                found: self.components,
            });
        }
        let n = self.grid.len();
        Ok(Self {
            grid: self.grid.clone(),
            components: count,
            values: self.values[start * n..(start + count) * n].to_vec(),
        })
    }

    pub fn to_vector(&self) -> nalgebra::DVector<C64> {
        nalgebra::DVector::from_column_slice(&self.values)
    }

    pub fn from_vector(grid: &SpatialGrid1D, components: usize, v: &nalgebra::DVector<C64>) -> Result<Self> {
        Self::from_values(grid, components, v.as_slice().to_vec())
    }
}

/// Pointwise Hermitian positive-definite weight in the fibre inner product.
#[derive(Clone, Debug, PartialEq)]
pub enum FibreProduct {
    Identity,
    PerPoint(Vec<DMatrix<C64>>),
}

impl Default for FibreProduct {
    fn default() -> Self {
        FibreProduct::Identity
    }
}

impl FibreProduct {
    /// Validates Hermiticity (1e-12) and positive-definiteness at every point.
    pub fn per_point(weights: Vec<DMatrix<C64>>) -> Result<Self> {
        for (j, w) in weights.iter().enumerate() {
            if !w.is_square() {
                return Err(Error::InvalidParameter(format!("fibre weight at point {j} is not square")));
            }
            let defect = (w - w.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
            if defect > 1e-12 * (1.0 + w.norm()) {
                return Err(Error::NotHermitian { defect });
            }
            // complex Cholesky does not reject negative pivots, so inspect the spectrum
            let lowest = w.clone().symmetric_eigenvalues().min();
            if !(lowest > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "fibre weight at point {j} is not positive definite"
                )));
            }
        }
        Ok(FibreProduct::PerPoint(weights))
    }

    /// Product induced by pointwise frames: `⟨u|v⟩_x = ⟨l_x u | l_x v⟩`.
    pub fn induced(frames: &[DMatrix<C64>]) -> Result<Self> {
        Self::per_point(frames.iter().map(|l| l.adjoint() * l).collect())
    }
}

/// `Σ_j h · ψ(x_j)† W(x_j) χ(x_j)`; conjugate-linear in `psi`.
pub fn inner(psi: &GridFunction, chi: &GridFunction, fibre: &FibreProduct) -> Result<C64> {
    psi.check_shape(chi)?;
    let h = psi.grid.spacing();
    let n = psi.grid.len();
    let m = psi.components;
    let sum = match fibre {
        FibreProduct::Identity => psi
            .values
            .iter()
            .zip(&chi.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>(),
        FibreProduct::PerPoint(weights) => {
            if weights.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: weights.len(),
                });
            }
            let mut acc = C64::new(0.0, 0.0);
            for (j, w) in weights.iter().enumerate() {
                if w.nrows() != m {
                    return Err(Error::ComponentMismatch {
                        expected: m,
                        found: w.nrows(),
                    });
                }
                for a in 0..m {
                    let pa = psi.values[a * n + j].conj();
                    for b in 0..m {
                        acc += pa * w[(a, b)] * chi.values[b * n + j];
                    }
                }
            }
            acc
        }
    };
    Ok(sum * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> SpatialGrid1D {
        SpatialGrid1D::periodic(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(SpatialGrid1D::periodic(4, 1.0).is_err());
        assert!(SpatialGrid1D::periodic(16, 0.0).is_err());
    }

    #[test]
    fn spacing_depends_on_boundary() {
        assert_eq!(SpatialGrid1D::periodic(8, 8.0).unwrap().spacing(), 1.0);
        assert!((SpatialGrid1D::reflecting(9, 8.0).unwrap().spacing() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_has_zero_derivative() {
        for grid in [ring(16), SpatialGrid1D::reflecting(16, 1.0).unwrap()] {
            let f = GridFunction::from_fn(&grid, 2, |_, _| C64::new(3.0, -1.0));
            let d = f.derivative(1).unwrap();
            // hard walls see a jump at the edges; interior only
            let interior = match grid.boundary() {
                Boundary::Periodic => 0..16,
                Boundary::Reflecting => 1..15,
            };
            for a in 0..2 {
                for j in interior.clone() {
                    assert!(d.component(a)[j].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn spectral_derivative_of_fourier_mode() {
        let grid = ring(32);
        for mode in [-5i64, 1, 3, 7] {
            let k = grid.wavenumber(mode);
            let f = GridFunction::from_fn(&grid, 1, |_, x| C64::new(0.0, k * x).exp());
            let d = f.derivative(1).unwrap();
            let expected = f.scaled(C64::new(0.0, k));
            assert!(d.max_abs_diff(&expected).unwrap() < 1e-10);
        }
    }

    #[test]
    fn second_derivative_of_sine() {
        let length = 3.0;
        let kk = 2.0 * PI / length;
        let periodic = SpatialGrid1D::periodic(32, length).unwrap();
        let f = GridFunction::from_fn(&periodic, 1, |_, x| C64::new((kk * x).sin(), 0.0));
        let d2 = f.derivative(2).unwrap();
        assert!(d2.max_abs_diff(&f.scaled(C64::new(-kk * kk, 0.0))).unwrap() < 1e-10);

        // central differences: error ~ k⁴h²/12
        let walls = SpatialGrid1D::reflecting(129, length).unwrap();
        let f = GridFunction::from_fn(&walls, 1, |_, x| C64::new((kk * x).sin(), 0.0));
        let d2 = f.derivative(2).unwrap();
        let h = walls.spacing();
        let tol = kk.powi(4) * h * h / 12.0 * 1.1;
        for j in 1..128 {
            let exact = -kk * kk * (kk * walls.coordinate(j)).sin();
            assert!((d2.component(0)[j].re - exact).abs() < tol);
        }
    }

    #[test]
    fn first_twice_matches_second_at_second_order() {
        let length = 2.0;
        let profile = |x: f64| C64::new((PI * x).sin().powi(2) * (-(x - 1.0).powi(2)).exp(), 0.0);
        let err = |n: usize| {
            let grid = SpatialGrid1D::reflecting(n, length).unwrap();
            let f = GridFunction::from_fn(&grid, 1, |_, x| profile(x));
            let twice = f.derivative(1).unwrap().derivative(1).unwrap();
            let direct = f.derivative(2).unwrap();
            (2..n - 2)
                .map(|j| (twice.component(0)[j] - direct.component(0)[j]).norm())
                .fold(0.0, f64::max)
        };
        let rate = (err(65) / err(129)).log2();
        assert!(rate > 1.8, "rate {rate}");
    }

    #[test]
    fn unsupported_order_rejected() {
        let grid = ring(8);
        assert_eq!(
            grid.differentiate(&[C64::new(0.0, 0.0); 8], 3),
            Err(Error::UnsupportedOrder(3))
        );
    }

    #[test]
    fn fourier_modes_are_orthogonal() {
        let grid = ring(16);
        let mode = |m: i64| {
            let k = grid.wavenumber(m);
            GridFunction::from_fn(&grid, 1, |_, x| C64::new(0.0, k * x).exp())
        };
        let ip = inner(&mode(2), &mode(5), &FibreProduct::Identity).unwrap();
        assert!(ip.norm() < 1e-12);
        let nn = inner(&mode(2), &mode(2), &FibreProduct::Identity).unwrap();
        assert!((nn.re - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn weighted_inner_is_hermitian() {
        let grid = ring(8);
        let w = DMatrix::from_row_slice(2, 2, &[
            C64::new(2.0, 0.0), C64::new(0.0, 0.5),
            C64::new(0.0, -0.5), C64::new(1.0, 0.0),
        ]);
        let fp = FibreProduct::per_point(vec![w; 8]).unwrap();
        let psi = GridFunction::from_fn(&grid, 2, |a, x| C64::new(x.cos() + a as f64, x.sin()));
        let chi = GridFunction::from_fn(&grid, 2, |a, x| C64::new(x * a as f64, 1.0 - x));
        let ab = inner(&psi, &chi, &fp).unwrap();
        let ba = inner(&chi, &psi, &fp).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-12);
        assert!(inner(&psi, &psi, &fp).unwrap().re > 0.0);
    }

    #[test]
    fn fibre_product_rejects_indefinite_weight() {
        let w = DMatrix::from_diagonal_element(2, 2, C64::new(-1.0, 0.0));
        assert!(FibreProduct::per_point(vec![w]).is_err());
    }

    #[test]
    fn discrete_delta_integrates_to_one() {
        let grid = ring(16);
        let d = grid.delta(1.0);
        let total: C64 = d.iter().sum::<C64>() * grid.spacing();
        assert!((total.re - 1.0).abs() < 1e-14);
    }
}
