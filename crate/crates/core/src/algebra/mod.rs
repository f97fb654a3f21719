//! Matrix operators over grid functions, γ-matrices and point-dependent frames.

pub mod basis;
pub mod gamma;
pub mod operator;

pub use basis::{derivative_in_basis, matrix_in_basis, Frame};
pub use gamma::{
    anticommutator_defect, dirac_gammas, kg_gammas, pauli, slashed_contract, slashed_matrix, slashed_scalars, GammaSet,
    METRIC,
};
pub use operator::{GridOperator, MatrixOperator, OperatorKind};
