//! Dense complex linear algebra: the matrix and state types, a Jacobi
//! eigensolver for Hermitian matrices, spectral matrix functions and
//! Gram-Schmidt orthonormalization.

mod eigen;
mod gram_schmidt;
mod matrix;

pub use eigen::{
    hermitian_eigendecompose, matrix_function, spectral_norm, Eigensystem, MAX_SWEEPS, OFF_DIAGONAL_TOL,
};
pub use gram_schmidt::{
    orthonormal_extension, orthonormalize, project_out, Orthonormalized, DEFAULT_DEFLATION_TOL,
};
pub use matrix::{ComplexMatrix, StateVector, HERMITIAN_TOL};
