//! Dense complex linear algebra: the matrix type, products, adjoints, traces,
//! a one-sided Jacobi SVD and rank-revealing elimination.

mod elimination;
mod matrix;
mod svd;

pub use elimination::{
    complement_indices, inverse, null_space, rank, solve_full_column_rank, RowEchelon, RANK_TOL,
};
pub use matrix::ComplexMatrix;
pub use svd::{operator_norm, svd, svd_values, SingularValueList, Svd, MAX_SWEEPS, OFF_DIAGONAL_MASS_TOL};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("{len} entries cannot fill a {rows}x{cols} matrix")]
    EntryCount { rows: usize, cols: usize, len: usize },
    #[error("rows have differing lengths")]
    RaggedRows,
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("singular values must be finite, non-negative and non-increasing")]
    InvalidSingularValues,
    #[error("Jacobi SVD did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("rank deficient: expected rank {expected}, found {found}")]
    RankDeficient { expected: usize, found: usize },
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    a.matmul(b)
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

pub fn trace(a: &ComplexMatrix) -> Result<Complex64, LinalgError> {
    a.trace()
}
