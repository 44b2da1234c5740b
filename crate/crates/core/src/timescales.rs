//! Scrambling and Heisenberg times.
//!
//! Consecutive Dyson terms `A_n(T) = (-iHT)^n / n!` have spectral norms
//! `(σ_max T)^n / n!`, so the terms of order `m-1` and `m` balance at
//! `τ_scr = m / ||H||`. Spreading that over `m` generator applications gives
//! the step `Δt_scr = 1 / ||H||`. The Heisenberg time is `2π / s̄` with
//! `s̄ = (1/N) Σ_n (ε_{n+1} - ε_n)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecompose, ComplexMatrix, Eigensystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimescaleReport {
    /// Spectral norm `σ_max(H)`.
    pub h_norm: f64,
    pub grade: usize,
    pub tau_scr: f64,
    pub dt_scr: f64,
    pub mean_spacing: f64,
    #[serde(rename = "tau_H")]
    pub tau_h: f64,
}

impl TimescaleReport {
    pub fn heisenberg_over_scrambling(&self) -> f64 {
        self.tau_h / self.tau_scr
    }
}

/// Spectral norm of the `n`-th Dyson term at time `t`.
pub fn dyson_term_norm(h: &ComplexMatrix, t: f64, n: u32) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("Dyson term time must be nonnegative, got {t}")));
    }
    let sigma = hermitian_eigendecompose(h)?.spectral_norm();
    Ok(dyson_norm_from(sigma, t, n))
}

fn dyson_norm_from(sigma: f64, t: f64, n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * sigma * t / k as f64)
}

pub fn compute_timescales(h: &ComplexMatrix, grade: usize) -> Result<TimescaleReport> {
    timescales_from(&hermitian_eigendecompose(h)?, grade)
}

pub fn timescales_from(eig: &Eigensystem, grade: usize) -> Result<TimescaleReport> {
    if grade == 0 {
        return Err(Error::InvalidArgument("Krylov grade must be at least 1".into()));
    }
    let n = eig.dim();
    let h_norm = eig.spectral_norm();
    if h_norm == 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    let mean_spacing = eig.eigenvalues.windows(2).map(|w| w[1] - w[0]).sum::<f64>() / n as f64;
    if !(mean_spacing > 0.0) {
        return Err(Error::DegenerateSpectrum);
    }
    Ok(TimescaleReport {
        h_norm,
        grade,
        tau_scr: grade as f64 / h_norm,
        dt_scr: 1.0 / h_norm,
        mean_spacing,
        tau_h: 2.0 * PI / mean_spacing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_gue, EnsembleSpec};
    use num_complex::Complex64;

    #[test]
    fn zeroth_dyson_term_is_identity() {
        let h = sample_gue(&EnsembleSpec::new(3, 0)).unwrap();
        assert_eq!(dyson_term_norm(&h, 2.0, 0).unwrap(), 1.0);
    }

    #[test]
    fn dyson_terms_balance_at_scrambling_time() {
        let h = sample_gue(&EnsembleSpec::new(3, 0).normalized(true)).unwrap();
        let a3 = dyson_term_norm(&h, 3.0, 3).unwrap();
        let a2 = dyson_term_norm(&h, 3.0, 2).unwrap();
        assert!((a3 - 4.5).abs() < 1e-9 && (a2 - 4.5).abs() < 1e-9);
    }

    #[test]
    fn dyson_norm_matches_matrix_power() {
        let h = sample_gue(&EnsembleSpec::new(5, 12)).unwrap();
        let t = 0.37;
        let mut p = ComplexMatrix::identity(5);
        for k in 1..=5 {
            p = p.matmul(&h).unwrap().scaled(Complex64::new(t / k as f64, 0.0));
        }
        let direct = hermitian_eigendecompose(&p).unwrap().spectral_norm();
        let formula = dyson_term_norm(&h, t, 5).unwrap();
        assert!((direct - formula).abs() <= 1e-9 * formula);
    }

    #[test]
    fn report_for_evenly_spaced_spectrum() {
        let r = compute_timescales(&ComplexMatrix::from_diagonal(&[0.0, 1.0, 2.0]), 3).unwrap();
        assert_eq!(r.h_norm, 2.0);
        assert!((r.mean_spacing - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.tau_h - 3.0 * PI).abs() < 1e-12);
        assert_eq!(r.tau_scr, 1.5);
        assert_eq!(r.dt_scr, 0.5);
    }

    #[test]
    fn unit_norm_gives_tau_scr_equal_grade() {
        let h = sample_gue(&EnsembleSpec::new(4, 3).normalized(true)).unwrap();
        let r = compute_timescales(&h, 4).unwrap();
        assert!((r.tau_scr - 4.0).abs() < 1e-9);
        assert!((r.tau_scr - r.grade as f64 * r.dt_scr).abs() <= 1e-12 * r.tau_scr);
    }

    #[test]
    fn scale_covariance() {
        let h = sample_gue(&EnsembleSpec::new(6, 1)).unwrap();
        let r = compute_timescales(&h, 6).unwrap();
        let r3 = compute_timescales(&h.scaled(Complex64::new(3.0, 0.0)), 6).unwrap();
        for (a, b) in [(r.tau_scr, r3.tau_scr), (r.dt_scr, r3.dt_scr), (r.tau_h, r3.tau_h)] {
            assert!((a / 3.0 - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn degenerate_spectrum_has_no_heisenberg_time() {
        let h = ComplexMatrix::from_diagonal(&[1.0, 1.0]);
        assert_eq!(compute_timescales(&h, 1), Err(Error::DegenerateSpectrum));
    }
}
