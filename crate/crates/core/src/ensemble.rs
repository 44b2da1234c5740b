//! Seeded GUE sampling and initial states.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`): the generator is seeded
//! with `seed_from_u64(seed)` and the 64-bit `stream` selects an independent
//! stream, so sample `k` of a run uses `(seed, stream = k)`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecompose, ComplexMatrix, Eigensystem, StateVector};

/// Gaps below this make the eigenbasis (and so the superposition) phase
/// convention dependent.
pub const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnsembleSpec {
    pub dim: usize,
    pub seed: u64,
    /// ChaCha stream index; distinct samples of one run use distinct streams.
    pub stream: u64,
    /// Rescale so that the largest singular value is exactly 1.
    pub normalize_spectral_norm: bool,
}

impl EnsembleSpec {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self { dim, seed, stream: 0, normalize_spectral_norm: false }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn normalized(mut self, on: bool) -> Self {
        self.normalize_spectral_norm = on;
        self
    }
}

/// Draws `H = (A + A^H)/2` with `Re A_ij, Im A_ij ~ N(0, 1)` i.i.d.
///
/// Diagonal entries are real with variance 1; off-diagonal entries have
/// per-component variance 1/2, so `E|H_ij|² = 1` and the spectrum fills the
/// semicircle of radius `2√N`.
pub fn sample_gue(spec: &EnsembleSpec) -> Result<ComplexMatrix> {
    let n = spec.dim;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("GUE dimension must be at least 2, got {n}")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    rng.set_stream(spec.stream);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let a = ComplexMatrix::from_fn(n, n, |_, _| {
        let re = draw();
        let im = draw();
        Complex64::new(re, im)
    });
    let mut h = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(a[(i, i)].re, 0.0)
        } else {
            (a[(i, j)] + a[(j, i)].conj()) * 0.5
        }
    });
    if spec.normalize_spectral_norm {
        let norm = hermitian_eigendecompose(&h)?.spectral_norm();
        h = h.scaled(Complex64::new(1.0 / norm, 0.0));
    }
    Ok(h)
}

/// The uniform superposition of eigenstates together with its eigensystem.
#[derive(Debug, Clone)]
pub struct Superposition {
    pub state: StateVector,
    pub eigensystem: Eigensystem,
    /// Smallest gap between consecutive eigenvalues.
    pub min_gap: f64,
    /// Set when `min_gap < DEGENERACY_GAP`.
    pub degenerate: bool,
}

/// `|ψ0⟩ = N^{-1/2} Σ_n |φ_n⟩`, eigenvectors in ascending eigenvalue order,
/// each phase-fixed so its largest-magnitude entry is real and positive.
pub fn uniform_eigenstate_superposition(h: &ComplexMatrix) -> Result<Superposition> {
    let eig = hermitian_eigendecompose(h)?;
    Ok(superposition_from(eig))
}

pub fn superposition_from(eig: Eigensystem) -> Superposition {
    let n = eig.dim();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
    let weight = 1.0 / (n as f64).sqrt();
    for k in 0..n {
        let phi = eig.eigenvectors.column(k);
        let pivot = phi
            .as_slice()
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("eigenvector is non-empty");
        let phase = pivot.conj() / pivot.norm();
        for (acc, z) in amplitudes.iter_mut().zip(phi.as_slice()) {
            *acc += z * phase * weight;
        }
    }
    let min_gap = eig.eigenvalues.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mut state = StateVector::new(amplitudes);
    // Re-normalize away the rounding in the eigenvector columns.
    state = state.normalized().expect("superposition of orthonormal vectors is non-zero");
    Superposition { state, eigensystem: eig, degenerate: min_gap < DEGENERACY_GAP, min_gap }
}
