//! Projected Hamiltonians, their band structure, and the randomized check
//! that the unitary generator beats the Krylov basis.
//!
//! The matrix plotted as the "Hessian" of a generator is `H` written in that
//! generator's orthonormal basis, `M_ij = ⟨b_i|H|b_j⟩`. For the first-order
//! basis it is the Lanczos tridiagonal matrix; higher orders fill in bands
//! above and below the diagonal as `Δt` grows.
//!
//! [`verify_theorem1`] samples GUE matrices and, for each time `τ` of a sweep,
//! builds the unitary basis with step `Δt = τ`. Since `ψ(τ) = U^τ ψ0` is in
//! the span of the first two unitary basis vectors, its spread in that basis
//! is `1 - |κ_0|²`, strictly below the first-order value
//! `1 - |κ_0|² + Σ_{n≥2} (n-1) |κ^(1)_n|²`.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::Propagator;
use crate::ensemble::{sample_gue, superposition_from, EnsembleSpec};
use crate::error::{Error, Result};
use crate::krylov::{build_basis_from_eigensystem, build_basis_with, BasisOptions, GeneratorOrder, KrylovBasis};
use crate::linalg::{hermitian_eigendecompose, ComplexMatrix};
use crate::timescales::timescales_from;

/// Default magnitude above which a projected entry counts as coupled.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ProjectedMatrix {
    pub entries: ComplexMatrix,
    pub order: GeneratorOrder,
    pub dt: f64,
    pub support_threshold: f64,
}

impl ProjectedMatrix {
    pub fn magnitudes(&self) -> Vec<Vec<f64>> {
        let m = self.entries.rows();
        (0..m).map(|i| (0..m).map(|j| self.entries[(i, j)].norm()).collect()).collect()
    }

    /// Largest `|M_ij|` with `|i - j| > 1`.
    pub fn max_off_tridiagonal(&self) -> f64 {
        let m = self.entries.rows();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                if i.abs_diff(j) > 1 {
                    worst = worst.max(self.entries[(i, j)].norm());
                }
            }
        }
        worst
    }
}

/// `M_ij = ⟨b_i|H|b_j⟩` in the basis' vectors.
pub fn project_hamiltonian(basis: &KrylovBasis, h: &ComplexMatrix) -> Result<ProjectedMatrix> {
    if h.cols() != basis.dim() {
        return Err(Error::Dimension(format!("basis vectors have {} entries, Hamiltonian is {}x{}", basis.dim(), h.rows(), h.cols())));
    }
    let images: Vec<_> = basis.vectors().iter().map(|b| h.apply(b)).collect::<Result<_>>()?;
    let m = basis.grade();
    let entries = ComplexMatrix::from_fn(m, m, |i, j| basis.vectors()[i].inner(&images[j]));
    let tolerance = 1e-9 * entries.max_abs();
    let deviation = entries.hermiticity_deviation();
    if deviation > tolerance {
        return Err(Error::NotHermitian { deviation, tolerance });
    }
    Ok(ProjectedMatrix { entries, order: basis.order, dt: basis.dt, support_threshold: DEFAULT_SUPPORT_THRESHOLD })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandwidthProfile {
    /// Largest `|i - j|` over supported entries.
    pub max_band: usize,
    /// Mean `|i - j|` over supported entries.
    pub mean_band: f64,
    #[serde(skip)]
    pub mask: Vec<Vec<bool>>,
}

pub fn bandwidth_profile(m: &ProjectedMatrix) -> Result<BandwidthProfile> {
    let n = m.entries.rows();
    let mask: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|j| m.entries[(i, j)].norm() > m.support_threshold).collect()).collect();
    let mut max_band = 0;
    let mut total = 0usize;
    let mut count = 0usize;
    for (i, row) in mask.iter().enumerate() {
        for (j, &on) in row.iter().enumerate() {
            if on {
                let d = i.abs_diff(j);
                max_band = max_band.max(d);
                total += d;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::EmptySupport { threshold: m.support_threshold });
    }
    Ok(BandwidthProfile { max_band, mean_band: total as f64 / count as f64, mask })
}

/// Times `τ = f τ_H` with fractions `f` log-spaced over
/// `[min_fraction, max_fraction]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauSweep {
    pub min_fraction: f64,
    pub max_fraction: f64,
    pub points: usize,
}

impl Default for TauSweep {
    fn default() -> Self {
        Self { min_fraction: 1e-2, max_fraction: 1.0, points: 20 }
    }
}

impl TauSweep {
    pub fn fractions(&self) -> Result<Vec<f64>> {
        if !(self.min_fraction > 0.0) || !(self.max_fraction >= self.min_fraction) || self.points == 0 {
            return Err(Error::InvalidArgument(format!("invalid tau sweep {self:?}")));
        }
        if self.points == 1 {
            return Ok(vec![self.max_fraction]);
        }
        let (lo, hi) = (self.min_fraction.ln(), self.max_fraction.ln());
        let step = (hi - lo) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| if i + 1 == self.points { self.max_fraction } else { (lo + step * i as f64).exp() })
            .collect())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TauPoint {
    pub tau: f64,
    pub c1: f64,
    pub cinf: f64,
    pub margin: f64,
    /// Grade of the unitary basis built with `Δt = τ`.
    pub grade_inf: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub stream: u64,
    pub grade: usize,
    #[serde(rename = "tau_H")]
    pub tau_h: f64,
    pub points: Vec<TauPoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Report {
    pub dim: usize,
    pub seed: u64,
    pub trials: usize,
    pub sweep: TauSweep,
    /// Trials with `C^(∞,τ)(τ) >= C^(1)(τ)` at some `τ`.
    pub violations: usize,
    pub min_margin: f64,
    /// Draws discarded for having Krylov grade below 3.
    pub resampled: usize,
    /// `max |κ^(1)_0(τ) - κ^(∞)_0(τ)|`.
    pub max_kappa0_mismatch: f64,
    /// `max |κ^(∞)_2(τ)|`.
    pub max_kappa2_inf: f64,
    /// `max | |κ^(∞)_1|² - Σ_{n≥1} |κ^(1)_n|² |`; for grade 3 this is
    /// `|κ^(∞)_1|² - |κ^(1)_1|² - |κ^(1)_2|²`.
    pub max_transfer_residual: f64,
    pub records: Vec<TrialRecord>,
}

/// Upper bound on resampling attempts per trial before giving up.
const MAX_RESAMPLES: usize = 64;

/// Checks `C^(∞,τ)(τ) < C^(1)(τ)` on GUE draws over a sweep of `τ`.
///
/// Trial `k` draws from ChaCha stream `k`; draws with grade below 3 are
/// replaced from streams `trials, trials + 1, …`.
pub fn verify_theorem1(trials: usize, dim: usize, sweep: &TauSweep, seed: u64) -> Result<Theorem1Report> {
    if dim < 3 {
        return Err(Error::InvalidArgument(format!("dimension must be at least 3, got {dim}")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let fractions = sweep.fractions()?;
    let mut report = Theorem1Report {
        dim,
        seed,
        trials,
        sweep: *sweep,
        violations: 0,
        min_margin: f64::INFINITY,
        resampled: 0,
        max_kappa0_mismatch: 0.0,
        max_kappa2_inf: 0.0,
        max_transfer_residual: 0.0,
        records: Vec::with_capacity(trials),
    };
    let mut spare_stream = trials as u64;
    for trial in 0..trials {
        let mut stream = trial as u64;
        let mut attempts = 0;
        let (h, sup, basis1) = loop {
            let h = sample_gue(&EnsembleSpec::new(dim, seed).with_stream(stream))?;
            let sup = superposition_from(hermitian_eigendecompose(&h)?);
            let basis1 = build_basis_with(&h, &sup.state, &BasisOptions::new(GeneratorOrder::FIRST, 1.0))?;
            if basis1.grade() >= 3 {
                break (h, sup, basis1);
            }
            attempts += 1;
            report.resampled += 1;
            if attempts > MAX_RESAMPLES {
                return Err(Error::InvalidArgument(format!("trial {trial}: no grade-3 sample after {MAX_RESAMPLES} draws")));
            }
            stream = spare_stream;
            spare_stream += 1;
        };
        let ts = timescales_from(&sup.eigensystem, basis1.grade())?;
        let propagator = Propagator::new(sup.eigensystem.clone(), &sup.state)?;
        let mut points = Vec::with_capacity(fractions.len());
        let mut violated = false;
        for &f in &fractions {
            let tau = f * ts.tau_h;
            let psi = propagator.state_at(tau);
            let opts = BasisOptions::new(GeneratorOrder::Infinite, tau);
            let basis_inf = build_basis_from_eigensystem(&h, &sup.eigensystem, &sup.state, &opts)?;
            let k1 = basis1.overlaps(&psi);
            let kinf = basis_inf.overlaps(&psi);
            let c1 = spread(&k1);
            let cinf = spread(&kinf);
            let margin = c1 - cinf;
            if !(margin > 0.0) {
                violated = true;
            }
            report.min_margin = report.min_margin.min(margin);
            report.max_kappa0_mismatch = report.max_kappa0_mismatch.max((k1[0] - kinf[0]).norm());
            if let Some(k2) = kinf.get(2) {
                report.max_kappa2_inf = report.max_kappa2_inf.max(k2.norm());
            }
            if kinf.len() >= 2 {
                let moved: f64 = k1[1..].iter().map(|z| z.norm_sqr()).sum();
                let residual = (kinf[1].norm_sqr() - moved).abs();
                report.max_transfer_residual = report.max_transfer_residual.max(residual);
            }
            points.push(TauPoint { tau, c1, cinf, margin, grade_inf: basis_inf.grade() });
        }
        if violated {
            report.violations += 1;
        }
        report.records.push(TrialRecord { trial, seed, stream, grade: basis1.grade(), tau_h: ts.tau_h, points });
    }
    Ok(report)
}

fn spread(kappa: &[Complex64]) -> f64 {
    kappa.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::uniform_eigenstate_superposition;
    use crate::krylov::build_basis;
    use crate::linalg::{StateVector, DEFAULT_DEFLATION_TOL};

    fn projected(entries: ComplexMatrix) -> ProjectedMatrix {
        ProjectedMatrix { entries, order: GeneratorOrder::FIRST, dt: 1.0, support_threshold: DEFAULT_SUPPORT_THRESHOLD }
    }

    #[test]
    fn pauli_x_projection() {
        let x = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let basis = build_basis(&x, GeneratorOrder::FIRST, 1.0, &StateVector::basis(2, 0), DEFAULT_DEFLATION_TOL).unwrap();
        let m = project_hamiltonian(&basis, &x).unwrap();
        assert!(m.entries.max_abs_diff(&x) < 1e-15);
    }

    #[test]
    fn first_order_projection_is_tridiagonal() {
        for seed in 0..4 {
            let h = sample_gue(&EnsembleSpec::new(8, seed)).unwrap();
            let psi = uniform_eigenstate_superposition(&h).unwrap().state;
            let basis = build_basis(&h, GeneratorOrder::FIRST, 1.0, &psi, DEFAULT_DEFLATION_TOL).unwrap();
            let m = project_hamiltonian(&basis, &h).unwrap();
            let norm = hermitian_eigendecompose(&h).unwrap().spectral_norm();
            assert!(m.max_off_tridiagonal() <= 1e-8 * norm);
            assert_eq!(bandwidth_profile(&m).unwrap().max_band, 1);
        }
    }

    #[test]
    fn band_metrics_on_fixed_patterns() {
        let tri = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0, 0.0], vec![2.0, 1.0, 2.0], vec![0.0, 2.0, 1.0]]).unwrap();
        let p = bandwidth_profile(&projected(tri)).unwrap();
        assert_eq!(p.max_band, 1);
        assert!((p.mean_band - 4.0 / 7.0).abs() < 1e-15);

        let diag = bandwidth_profile(&projected(ComplexMatrix::from_diagonal(&[1.0, 2.0, 3.0]))).unwrap();
        assert_eq!(diag.max_band, 0);
        assert_eq!(diag.mean_band, 0.0);

        let tiny = projected(ComplexMatrix::from_diagonal(&[1e-9, 1e-9]));
        assert!(matches!(bandwidth_profile(&tiny), Err(Error::EmptySupport { .. })));
    }

    #[test]
    fn sweep_is_log_spaced() {
        let f = TauSweep::default().fractions().unwrap();
        assert_eq!(f.len(), 20);
        assert!((f[0] - 1e-2).abs() < 1e-16);
        assert_eq!(f[19], 1.0);
        let r = f[1] / f[0];
        assert!(f.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-12));
        assert!(TauSweep { min_fraction: 0.0, ..TauSweep::default() }.fractions().is_err());
    }

    #[test]
    fn small_theorem_sweep() {
        let report = verify_theorem1(5, 3, &TauSweep::default(), 7).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.min_margin > 1e-10);
        assert!(report.max_kappa2_inf <= 1e-10);
        assert!(report.max_transfer_residual <= 1e-9);
        assert!(report.max_kappa0_mismatch <= 1e-12);
        assert_eq!(report.records.len(), 5);
    }

    #[test]
    fn theorem_sweep_in_higher_dimension() {
        let report = verify_theorem1(3, 6, &TauSweep { points: 6, ..TauSweep::default() }, 1).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.max_kappa2_inf <= 1e-10);
    }

    #[test]
    fn theorem_sweep_rejects_bad_arguments() {
        assert!(verify_theorem1(1, 2, &TauSweep::default(), 0).is_err());
        assert!(verify_theorem1(0, 3, &TauSweep::default(), 0).is_err());
    }
}
