//! Relativistic quantum mechanics on a one-dimensional lattice in the language
//! of fibre bundles: matrix operators, first-order reductions, time evolution,
//! transports along maps and retarded Green kernels.

pub mod algebra;
pub mod bundle;
pub mod error;
pub mod evolution;
pub mod green;
pub mod grid;
pub mod reduction;

pub use error::{Error, Result};
pub use grid::{inner, Boundary, FibreProduct, GridFunction, SpatialGrid1D};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
