//! Dense complex kernels, block-tridiagonal factorization and the
//! Krylov/Richardson drivers.

use thiserror::Error;

pub mod blocktri;
pub mod dense;
pub mod krylov;

pub use blocktri::{block_lu_solve, block_tridiag_factor, schur_recurrence, BlockTriSystem, SchurSequence};
pub use dense::{dense_lu_factor, DenseComplexMatrix, LuFactors};
pub use krylov::{gmres, richardson, IterationReport, LinearMap, Side, StopOn};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {pivot:e} at column {index})")]
    Singular { index: usize, pivot: f64 },
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("block {block} is singular (pivot {pivot:e} at column {index})")]
    SingularBlock { block: usize, index: usize, pivot: f64 },
}

impl LinalgError {
    /// Attach the block index to a singularity raised while inverting one block.
    pub fn at_block(self, block: usize) -> LinalgError {
        match self {
            LinalgError::Singular { index, pivot } => LinalgError::SingularBlock { block, index, pivot },
            other => other,
        }
    }
}
