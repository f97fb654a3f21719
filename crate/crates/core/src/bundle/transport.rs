//! Transports along paths generated by frames or by an evolution operator.

use nalgebra::{DMatrix, DVector};

use super::{PathSampling, Trivialization};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionProblem, Scheme};
use crate::grid::SpatialGrid1D;
use crate::reduction::HamiltonianFactory;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransportGenerator {
    Frames,
    Evolution(Scheme),
}

/// A two-point family `K_{l→m} = F_m⁻¹·F_l` over sampled parameter values.
#[derive(Clone, Debug)]
pub struct TransportAlongMap {
    times: Vec<f64>,
    frames: Vec<DMatrix<C64>>,
    inverses: Vec<DMatrix<C64>>,
    generator: TransportGenerator,
    analytic: Option<Vec<DMatrix<C64>>>,
}

/// `K_{l→m} = F_m⁻¹F_l` on the unit-spaced parameter `0, 1, 2, …`.
pub fn transport_from_frames(frames: Vec<DMatrix<C64>>) -> Result<TransportAlongMap> {
    let times = (0..frames.len()).map(|i| i as f64).collect();
    TransportAlongMap::from_frames(times, frames)
}

impl TransportAlongMap {
    /// Frame-built transport over the parameter values `times`.
    pub fn from_frames(times: Vec<f64>, frames: Vec<DMatrix<C64>>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Empty("transport frames".into()));
        }
        if times.len() != frames.len() {
            return Err(Error::DimensionMismatch {
                expected: frames.len(),
                found: times.len(),
            });
        }
        let d = frames[0].nrows();
        let mut inverses = Vec::with_capacity(frames.len());
        for (i, f) in frames.iter().enumerate() {
            if f.nrows() != d || f.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: f.nrows().max(f.ncols()),
                });
            }
            inverses.push(f.clone().try_inverse().ok_or_else(|| Error::Singular {
                context: format!("transport frame {i}"),
            })?);
        }
        Ok(Self {
            times,
            frames,
            inverses,
            generator: TransportGenerator::Frames,
            analytic: None,
        })
    }

    pub fn generator(&self) -> TransportGenerator {
        self.generator
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.frames[0].nrows()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frame(&self, i: usize) -> &DMatrix<C64> {
        &self.frames[i]
    }

    /// `K_{from→to}`.
    pub fn matrix(&self, to: usize, from: usize) -> DMatrix<C64> {
        &self.inverses[to] * &self.frames[from]
    }

    /// `K_{from→to} v`.
    pub fn apply(&self, to: usize, from: usize, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: v.len(),
            });
        }
        Ok(&self.inverses[to] * (&self.frames[from] * v))
    }

    /// The same transport from the frames `D·F_n`.
    pub fn regauged(&self, d: &DMatrix<C64>) -> Result<Self> {
        let mut out = Self::from_frames(self.times.clone(), self.frames.iter().map(|f| d * f).collect())?;
        out.generator = self.generator;
        out.analytic = self.analytic.clone();
        Ok(out)
    }

    /// Coefficients known in closed form (evolution transports).
    pub fn analytic_coefficients(&self) -> Option<&[DMatrix<C64>]> {
        self.analytic.as_deref()
    }

    fn uniform_spacing(&self) -> Result<f64> {
        let n = self.times.len();
        if n < 3 {
            return Err(Error::InsufficientSamples { required: 3, found: n });
        }
        uniform_spacing(&self.times)
    }

    /// `Γ(t_i) = −∂K_{i→t}/∂t |_{t=t_i}` from the sample lattice.
    pub fn coefficients(&self, stencil: Stencil) -> Result<TransportCoefficients> {
        let delta = self.uniform_spacing()?;
        let n = self.len();
        let d = self.dimension();
        let id = DMatrix::<C64>::identity(d, d);
        let matrices = (0..n)
            .map(|i| {
                let forward = |i: usize| (&id - self.matrix(i + 1, i)) * C64::new(1.0 / delta, 0.0);
                let backward = |i: usize| (self.matrix(i - 1, i) - &id) * C64::new(1.0 / delta, 0.0);
                match stencil {
                    Stencil::Forward if i + 1 < n => forward(i),
                    Stencil::Forward => backward(i),
                    Stencil::Backward if i > 0 => backward(i),
                    Stencil::Backward => forward(i),
                    Stencil::Central => {
                        let (offsets, weights) = central_weights(i, n);
                        let mut acc = DMatrix::zeros(d, d);
                        for (o, w) in offsets.iter().zip(weights) {
                            let j = (i as isize + o) as usize;
                            acc -= self.matrix(j, i) * C64::new(w / delta, 0.0);
                        }
                        acc
                    }
                }
            })
            .collect();
        Ok(TransportCoefficients {
            times: self.times.clone(),
            matrices,
        })
    }
}

fn uniform_spacing(times: &[f64]) -> Result<f64> {
    let delta = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - delta).abs() > 1e-9 * delta.abs().max(1e-300) {
            return Err(Error::InvalidParameter(format!(
                "sample spacing is not uniform at sample {i}"
            )));
        }
    }
    Ok(delta)
}

/// First-derivative weights (in units of `1/δ`) at sample `i` of `n`: five
/// points in the interior, three points next to the ends, one-sided at the ends.
fn central_weights(i: usize, n: usize) -> (Vec<isize>, Vec<f64>) {
    if n >= 5 && i >= 2 && i + 2 < n {
        (vec![-2, -1, 1, 2], vec![1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0])
    } else if i >= 1 && i + 1 < n {
        (vec![-1, 1], vec![-0.5, 0.5])
    } else if i == 0 {
        (vec![0, 1, 2], vec![-1.5, 2.0, -0.5])
    } else {
        (vec![-2, -1, 0], vec![0.5, -2.0, 1.5])
    }
}

/// Difference scheme used to extract coefficients from sampled transports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Stencil {
    #[default]
    Central,
    Forward,
    Backward,
}

/// Per-sample coefficient matrices `Γ(t_i)`.
#[derive(Clone, Debug)]
pub struct TransportCoefficients {
    times: Vec<f64>,
    matrices: Vec<DMatrix<C64>>,
}

impl TransportCoefficients {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn get(&self, i: usize) -> &DMatrix<C64> {
        &self.matrices[i]
    }

    pub fn matrices(&self) -> &[DMatrix<C64>] {
        &self.matrices
    }

    /// `max_i max |Γ_i − other_i|`.
    pub fn max_abs_diff(&self, other: &[DMatrix<C64>]) -> Result<f64> {
        if other.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .matrices
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max))
    }
}

/// Central-stencil coefficients of a sampled transport.
pub fn transport_coefficients(t: &TransportAlongMap) -> Result<TransportCoefficients> {
    t.coefficients(Stencil::Central)
}

/// Fibre values `λ(t_i)` at the samples of a transport.
#[derive(Clone, Debug, PartialEq)]
pub struct Lifting {
    values: Vec<DVector<C64>>,
}

impl Lifting {
    pub fn new(values: Vec<DVector<C64>>) -> Result<Self> {
        let first = values.first().ok_or_else(|| Error::Empty("lifting".into()))?;
        if let Some(v) = values.iter().find(|v| v.len() != first.len()) {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                found: v.len(),
            });
        }
        Ok(Self { values })
    }

    /// `λ(t_i) = K_{from→i} v`.
    pub fn transported(t: &TransportAlongMap, from: usize, v: &DVector<C64>) -> Result<Self> {
        Self::new((0..t.len()).map(|i| t.apply(i, from, v)).collect::<Result<_>>()?)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> &DVector<C64> {
        &self.values[i]
    }

    pub fn values(&self) -> &[DVector<C64>] {
        &self.values
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivationMode {
    /// `[K_{i+step→i} λ(i+step) − λ(i)] / (t_{i+step} − t_i)`, one-sided
    /// backwards at the end of the lattice.
    Limit { step: usize },
    /// `dλ/dt + Γλ`; `Γ` from the closed form when the transport has one.
    Analytic,
}

/// The derivation `D` of a lifting at sample `i`.
pub fn derivation_along_path(
    t: &TransportAlongMap,
    lambda: &Lifting,
    i: usize,
    mode: DerivationMode,
) -> Result<DVector<C64>> {
    let n = t.len();
    if lambda.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: lambda.len(),
        });
    }
    if i >= n {
        return Err(Error::InvalidParameter(format!("sample {i} outside 0..{n}")));
    }
    let times = t.times();
    match mode {
        DerivationMode::Limit { step } => {
            if step == 0 {
                return Err(Error::InvalidParameter("limit step must be positive".into()));
            }
            if i + step < n {
                let eps = times[i + step] - times[i];
                Ok((t.apply(i, i + step, lambda.value(i + step))? - lambda.value(i)) / C64::new(eps, 0.0))
            } else if i >= step {
                let eps = times[i] - times[i - step];
                Ok((lambda.value(i) - t.apply(i, i - step, lambda.value(i - step))?) / C64::new(eps, 0.0))
            } else {
                Err(Error::InsufficientSamples {
                    required: step + 1,
                    found: n,
                })
            }
        }
        DerivationMode::Analytic => {
            let delta = t.uniform_spacing()?;
            let (offsets, weights) = central_weights(i, n);
            let mut dl = DVector::zeros(t.dimension());
            for (o, w) in offsets.iter().zip(weights) {
                dl += lambda.value((i as isize + o) as usize) * C64::new(w / delta, 0.0);
            }
            let gamma = match t.analytic_coefficients() {
                Some(g) => g[i].clone(),
                None => t.coefficients(Stencil::Central)?.get(i).clone(),
            };
            Ok(dl + gamma * lambda.value(i))
        }
    }
}

fn lift(l: &Trivialization, problem: &EvolutionProblem) -> Result<Trivialization> {
    let d = problem.state_dimension();
    if l.dimension() == d {
        Ok(l.clone())
    } else if l.dimension() == problem.components() {
        Ok(l.over_grid(problem.grid()))
    } else {
        Err(Error::DimensionMismatch {
            expected: d,
            found: l.dimension(),
        })
    }
}

/// `Ĥ_γ(t_i) = l⁻¹·H(t_i)·l` at the path samples, on the flattened state space.
/// `l` may be given per grid point (it is then lifted with
/// [`Trivialization::over_grid`]) or on the full state space.
pub fn bundle_hamiltonian(
    h: &HamiltonianFactory,
    grid: &SpatialGrid1D,
    l: &Trivialization,
    path: &PathSampling,
) -> Result<Vec<DMatrix<C64>>> {
    let l = lift_for(h, grid, l)?;
    path.points()
        .into_iter()
        .map(|p| Ok(l.inverse_at(p)? * h.dense(p.t, grid)? * l.at(p)?))
        .collect()
}

/// `l⁻¹Hl − iħ·l⁻¹·dl/dt`, the Hamiltonian seen by liftings along the path.
pub fn matrix_bundle_hamiltonian(
    h: &HamiltonianFactory,
    grid: &SpatialGrid1D,
    l: &Trivialization,
    path: &PathSampling,
) -> Result<Vec<DMatrix<C64>>> {
    let l = lift_for(h, grid, l)?;
    let ih = C64::new(0.0, h.hbar());
    path.points()
        .into_iter()
        .map(|p| {
            let inv = l.inverse_at(p)?;
            let rate = path.frame_rate(&l, p.t)?;
            Ok(&inv * h.dense(p.t, grid)? * l.at(p)? - inv * rate * ih)
        })
        .collect()
}

fn lift_for(h: &HamiltonianFactory, grid: &SpatialGrid1D, l: &Trivialization) -> Result<Trivialization> {
    let d = h.dimension() * grid.len();
    if l.dimension() == d {
        Ok(l.clone())
    } else if l.dimension() == h.dimension() {
        Ok(l.over_grid(grid))
    } else {
        Err(Error::DimensionMismatch {
            expected: d,
            found: l.dimension(),
        })
    }
}

/// `U_γ(t_i, t_j) = l_i⁻¹·U(t_i, t_j)·l_j`, realized through the frames
/// `F_i = U(t_i, t₀)⁻¹·l_i`. The closed-form coefficients
/// `Γ = (i/ħ)·(l⁻¹Hl − iħ l⁻¹ dl/dt)` are attached.
pub fn evolution_transport(
    problem: &EvolutionProblem,
    l: &Trivialization,
    path: &PathSampling,
) -> Result<TransportAlongMap> {
    let l = lift(l, problem)?;
    let d = problem.state_dimension();
    let times = path.times().to_vec();
    for &t in &times {
        problem.lattice_index(t)?;
    }
    let mut u = DMatrix::<C64>::identity(d, d);
    let mut frames = Vec::with_capacity(times.len());
    let mut inverses = Vec::with_capacity(times.len());
    for (i, p) in path.points().into_iter().enumerate() {
        if i > 0 {
            u = problem.evolution_operator(times[i], times[i - 1])?.into_matrix() * u;
        }
        let li = l.at(p)?;
        inverses.push(l.inverse_at(p)? * &u);
        frames.push(u.clone().try_inverse().ok_or_else(|| Error::Singular {
            context: format!("evolution operator U({}, {})", times[i], times[0]),
        })? * li);
    }
    let scale = C64::new(0.0, 1.0 / problem.factory().hbar());
    let analytic = matrix_bundle_hamiltonian(problem.factory(), problem.grid(), &l, path)?
        .into_iter()
        .map(|m| m * scale)
        .collect();
    Ok(TransportAlongMap {
        times,
        frames,
        inverses,
        generator: TransportGenerator::Evolution(problem.scheme()),
        analytic: Some(analytic),
    })
}
