use num_complex::Complex64;

use super::matrix::StateVector;
use crate::error::{Error, Result};

/// Default relative residual below which a candidate counts as linearly
/// dependent on the vectors already kept.
pub const DEFAULT_DEFLATION_TOL: f64 = 1e-8;

/// Output of [`orthonormalize`]: the surviving orthonormal vectors and the
/// input positions they came from.
#[derive(Debug, Clone)]
pub struct Orthonormalized {
    pub basis: Vec<StateVector>,
    pub kept_indices: Vec<usize>,
}

/// Removes the components of `v` along the orthonormal `basis`, two modified
/// Gram-Schmidt passes.
pub fn project_out(basis: &[StateVector], v: &mut StateVector) {
    for _ in 0..2 {
        for b in basis {
            let overlap = b.inner(v);
            v.axpy(-overlap, b);
        }
    }
}

/// Orthonormalizes `candidate` against `basis`. Returns `None` when the
/// residual is below `deflation_tol` times the candidate's original norm.
pub fn orthonormal_extension(
    basis: &[StateVector],
    candidate: &StateVector,
    deflation_tol: f64,
) -> Option<StateVector> {
    let original = candidate.norm();
    if original == 0.0 || !original.is_finite() {
        return None;
    }
    let mut r = candidate.clone();
    project_out(basis, &mut r);
    let residual = r.norm();
    if residual < deflation_tol * original {
        return None;
    }
    r.scale(Complex64::new(1.0 / residual, 0.0));
    Some(r)
}

/// Modified Gram-Schmidt with one full reorthogonalization pass. Deflated
/// candidates are skipped; survivors keep input order.
pub fn orthonormalize(vectors: &[StateVector], deflation_tol: f64) -> Result<Orthonormalized> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot orthonormalize an empty list".into()))?;
    if !(deflation_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("deflation tolerance must be positive, got {deflation_tol}")));
    }
    if vectors.iter().any(|v| v.dim() != first.dim()) {
        return Err(Error::Dimension("vectors differ in dimension".into()));
    }
    let mut basis = Vec::new();
    let mut kept_indices = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        if let Some(q) = orthonormal_extension(&basis, v, deflation_tol) {
            basis.push(q);
            kept_indices.push(i);
        }
    }
    Ok(Orthonormalized { basis, kept_indices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigendecompose, ComplexMatrix};

    fn gram(basis: &[StateVector]) -> ComplexMatrix {
        ComplexMatrix::from_fn(basis.len(), basis.len(), |i, j| basis[i].inner(&basis[j]))
    }

    fn pseudo_random_vectors(count: usize, dim: usize, mut state: u64) -> Vec<StateVector> {
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 2000) as f64 / 1000.0 - 1.0
        };
        (0..count)
            .map(|_| StateVector::new((0..dim).map(|_| Complex64::new(next(), next())).collect()))
            .collect()
    }

    #[test]
    fn already_orthonormal_input_is_unchanged() {
        let out = orthonormalize(&[StateVector::basis(2, 0), StateVector::basis(2, 1)], 1e-8).unwrap();
        assert_eq!(out.kept_indices, vec![0, 1]);
        assert_eq!(out.basis[0], StateVector::basis(2, 0));
        assert_eq!(out.basis[1], StateVector::basis(2, 1));
    }

    #[test]
    fn duplicate_is_deflated() {
        let out = orthonormalize(&[StateVector::basis(2, 0), StateVector::basis(2, 0)], 1e-8).unwrap();
        assert_eq!(out.kept_indices, vec![0]);
        assert_eq!(out.basis.len(), 1);
    }

    #[test]
    fn overcomplete_set_keeps_rank_many() {
        let vs = pseudo_random_vectors(6, 4, 0x9e3779b97f4a7c15);
        // Rank oracle: count eigenvalues of the input Gram matrix above noise.
        let g = gram(&vs);
        let eig = hermitian_eigendecompose(&g).unwrap();
        let rank = eig.eigenvalues.iter().filter(|&&e| e > 1e-10 * eig.spectral_norm()).count();
        assert_eq!(rank, 4);

        let out = orthonormalize(&vs, 1e-8).unwrap();
        assert_eq!(out.basis.len(), rank);
        assert!(gram(&out.basis).max_abs_diff(&ComplexMatrix::identity(4)) <= 1e-10);
    }

    #[test]
    fn rejects_empty_and_bad_tolerance() {
        assert!(matches!(orthonormalize(&[], 1e-8), Err(Error::InvalidArgument(_))));
        assert!(orthonormalize(&[StateVector::basis(2, 0)], 0.0).is_err());
    }
}
