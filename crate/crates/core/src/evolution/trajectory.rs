//! Snapshots of an evolved state on a uniform time lattice.

use crate::error::{Error, Result};
use crate::grid::{inner, FibreProduct, GridFunction};
use crate::C64;

#[derive(Clone, Debug)]
pub struct Trajectory {
    start: f64,
    spacing: f64,
    snapshots: Vec<GridFunction>,
}

impl Trajectory {
    pub fn new(start: f64, spacing: f64, snapshots: Vec<GridFunction>) -> Result<Self> {
        let first = snapshots.first().ok_or_else(|| Error::Empty("trajectory".into()))?;
        for s in &snapshots {
            first.check_shape(s)?;
        }
        Ok(Self {
            start,
            spacing,
            snapshots,
        })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start + i as f64 * self.spacing
    }

    pub fn snapshot(&self, i: usize) -> &GridFunction {
        &self.snapshots[i]
    }

    pub fn snapshots(&self) -> &[GridFunction] {
        &self.snapshots
    }

    pub fn last(&self) -> &GridFunction {
        self.snapshots.last().expect("trajectory is never empty")
    }

    /// Second-order `∂ψ/∂t` at snapshot `i` (one-sided at the ends).
    pub fn time_derivative(&self, i: usize) -> Result<GridFunction> {
        let n = self.snapshots.len();
        if n < 3 {
            return Err(Error::InsufficientSamples { required: 3, found: n });
        }
        let s = &self.snapshots;
        let k = C64::new(1.0 / (2.0 * self.spacing), 0.0);
        let (a, b, c, w) = if i == 0 {
            (&s[0], &s[1], &s[2], [-3.0, 4.0, -1.0])
        } else if i == n - 1 {
            (&s[n - 3], &s[n - 2], &s[n - 1], [1.0, -4.0, 3.0])
        } else {
            (&s[i - 1], &s[i], &s[i + 1], [-1.0, 0.0, 1.0])
        };
        Ok(a
            .scaled(C64::new(w[0], 0.0))
            .axpy(C64::new(w[1], 0.0), b)?
            .axpy(C64::new(w[2], 0.0), c)?
            .scaled(k))
    }

    /// Angular frequency `ω` of the overlap `⟨ref|ψ(t)⟩ ∝ e^{−iωt}`, from a
    /// least-squares fit of the unwrapped phase over all snapshots.
    pub fn frequency(&self, reference: &GridFunction) -> Result<f64> {
        let n = self.snapshots.len();
        if n < 2 {
            return Err(Error::InsufficientSamples { required: 2, found: n });
        }
        let mut phases = Vec::with_capacity(n);
        let mut prev = 0.0;
        for (i, s) in self.snapshots.iter().enumerate() {
            let z = inner(reference, s, &FibreProduct::Identity)?;
            if z.norm() == 0.0 {
                return Err(Error::ZeroNorm);
            }
            let mut a = z.arg();
            if i > 0 {
                let tau = 2.0 * std::f64::consts::PI;
                a += tau * ((prev - a) / tau).round();
            }
            phases.push(a);
            prev = a;
        }
        let ts: Vec<f64> = (0..n).map(|i| self.time(i)).collect();
        let tm = ts.iter().sum::<f64>() / n as f64;
        let pm = phases.iter().sum::<f64>() / n as f64;
        let (num, den) = ts.iter().zip(&phases).fold((0.0, 0.0), |(a, b), (t, p)| {
            (a + (t - tm) * (p - pm), b + (t - tm).powi(2))
        });
        Ok(-num / den)
    }
}
