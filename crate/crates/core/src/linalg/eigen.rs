//! Cyclic Jacobi eigensolver for complex Hermitian matrices, plus the
//! spectral-calculus helpers built on it.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, StateVector};
use crate::error::{Error, Result};

/// Sweep cap for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;

/// Convergence threshold on the off-diagonal Frobenius norm, relative to
/// `||H||_F`.
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Ascending real eigenvalues with the matching unitary eigenvector matrix
/// (eigenvectors are its columns).
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V f(Λ) V^H`.
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let fl: Vec<Complex64> = self.eigenvalues.iter().map(|&e| f(e)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)].conj()).sum())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|e| Complex64::new(e, 0.0))
    }

    /// Expansion coefficients `<φ_n|ψ>` of a vector in the eigenbasis.
    pub fn coefficients(&self, psi: &StateVector) -> Vec<Complex64> {
        (0..self.dim()).map(|k| self.eigenvectors.column(k).inner(psi)).collect()
    }

    /// Rebuilds a vector from eigenbasis coefficients.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> StateVector {
        let n = self.dim();
        let v = &self.eigenvectors;
        StateVector::new((0..n).map(|i| (0..n).map(|k| v[(i, k)] * coeffs[k]).sum()).collect())
    }

    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max)
    }
}

/// Diagonalizes a Hermitian matrix with cyclic complex Jacobi rotations.
pub fn hermitian_eigendecompose(h: &ComplexMatrix) -> Result<Eigensystem> {
    h.ensure_hermitian()?;
    let n = h.rows();
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);

    let target = OFF_DIAGONAL_TOL * h.frobenius_norm();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        let off_norm = off_diagonal_norm(&a);
        if off_norm > target {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_norm });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(Eigensystem { eigenvalues, eigenvectors })
}

/// Largest singular value of a Hermitian matrix, `max |ε_n|`.
pub fn spectral_norm(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigendecompose(h)?.spectral_norm())
}

/// Applies a scalar function through the spectrum: `V f(Λ) V^H`.
pub fn matrix_function(h: &ComplexMatrix, f: impl Fn(f64) -> Complex64) -> Result<ComplexMatrix> {
    Ok(hermitian_eigendecompose(h)?.map(f))
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

// One unitary rotation J = D R in the (p, q) plane zeroing a[p][q]. D puts a
// phase on q so the pivot becomes real, R is the real symmetric rotation.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip pivots already negligible next to both diagonal entries.
    if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = -s * phase.conj();
    let jqq = c * phase.conj();

    let n = a.rows();
    // A <- A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    // A <- J^H A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    // V <- V J
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}
