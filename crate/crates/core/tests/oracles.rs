//! Checks against independent numerical oracles.

use std::f64::consts::PI;

use krylov_core::dynamics::{amplitudes, chain_ode_integrate, Propagator, TimeGrid};
use krylov_core::ensemble::{sample_gue, uniform_eigenstate_superposition, EnsembleSpec};
use krylov_core::krylov::{build_basis, GeneratorOrder};
use krylov_core::linalg::{hermitian_eigendecompose, spectral_norm, ComplexMatrix, StateVector, DEFAULT_DEFLATION_TOL};
use krylov_core::timescales::{compute_timescales, dyson_term_norm};
use krylov_core::Complex64;

fn gue(dim: usize, seed: u64) -> ComplexMatrix {
    sample_gue(&EnsembleSpec::new(dim, seed)).unwrap()
}

/// Composite Simpson rule.
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (hi - lo) / n as f64;
    let inner: f64 = (1..n).map(|k| f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(lo) + f(hi) + inner) * h / 3.0
}

#[test]
fn gue_spectrum_follows_semicircle() {
    let dim = 200;
    // E|H_ij|^2 = 1 off the diagonal, so the semicircle has radius 2 sqrt(N).
    let radius = 2.0 * (dim as f64).sqrt();
    let density = |x: f64| 2.0 / (PI * radius * radius) * (radius * radius - x * x).max(0.0).sqrt();
    let half_width = 0.5 * (2.0 * dim as f64).sqrt();
    let expected = simpson(density, -half_width, half_width, 20_000);
    assert!((simpson(density, -radius, radius, 20_000) - 1.0).abs() < 1e-4);

    let samples = 50;
    let mut inside = 0usize;
    for seed in 0..samples {
        let eig = hermitian_eigendecompose(&gue(dim, seed)).unwrap();
        inside += eig.eigenvalues.iter().filter(|e| e.abs() <= half_width).count();
    }
    let fraction = inside as f64 / (samples as usize * dim) as f64;
    assert!((fraction - expected).abs() <= 0.05, "fraction {fraction}, semicircle {expected}");
}

#[test]
fn spectral_norm_matches_power_iteration() {
    let h = gue(50, 11);
    let h2 = h.matmul(&h).unwrap();
    let mut v = StateVector::new((0..50).map(|i| Complex64::new(1.0 + 0.01 * i as f64, 0.3)).collect());
    let mut lambda = 0.0;
    for _ in 0..20_000 {
        let w = h2.apply(&v).unwrap();
        let next = w.norm();
        v = w.normalized().unwrap();
        if (next - lambda).abs() <= 1e-15 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    let oracle = lambda.sqrt();
    let got = spectral_norm(&h).unwrap();
    assert!((got - oracle).abs() <= 1e-8 * oracle, "{got} vs {oracle}");
}

#[test]
fn superposition_reaches_full_grade() {
    for dim in 2..=10 {
        for seed in 0..5 {
            let h = gue(dim, seed);
            let sup = uniform_eigenstate_superposition(&h).unwrap();
            assert!(!sup.degenerate);
            let basis = build_basis(&h, GeneratorOrder::FIRST, 1.0, &sup.state, DEFAULT_DEFLATION_TOL).unwrap();
            assert_eq!(basis.grade(), dim, "dim {dim} seed {seed}");
        }
    }
}

#[test]
fn projected_hamiltonian_matches_lanczos_pattern() {
    for seed in 0..5 {
        let h = gue(5, seed);
        let psi = uniform_eigenstate_superposition(&h).unwrap().state;
        let basis = build_basis(&h, GeneratorOrder::FIRST, 1.0, &psi, DEFAULT_DEFLATION_TOL).unwrap();
        let lc = basis.lanczos_coefficients().unwrap();
        let k = basis.vectors();
        for i in 0..k.len() {
            let hk = h.apply(&k[i]).unwrap();
            for (j, kj) in k.iter().enumerate() {
                let m = kj.inner(&hk);
                let expected = if i == j {
                    lc.a[i]
                } else if j + 1 == i {
                    lc.b[j]
                } else if i + 1 == j {
                    lc.b[i]
                } else {
                    0.0
                };
                assert!((m - Complex64::new(expected, 0.0)).norm() <= 1e-8, "({j},{i}) {m} vs {expected}");
            }
        }
    }
}

#[test]
fn small_time_amplitudes_follow_taylor_laws() {
    for seed in 0..20 {
        let h = gue(5, 100 + seed);
        let psi = uniform_eigenstate_superposition(&h).unwrap().state;
        let basis = build_basis(&h, GeneratorOrder::FIRST, 1.0, &psi, DEFAULT_DEFLATION_TOL).unwrap();
        let lc = basis.lanczos_coefficients().unwrap();
        let (b1, b2) = (lc.b[0], lc.b[1]);
        let t = 1e-3 / spectral_norm(&h).unwrap();
        let kappa = Propagator::from_hamiltonian(&h, &psi).unwrap().amplitudes_at(&basis, t);
        let k1 = Complex64::new(0.0, -b1 * t);
        let k2 = Complex64::new(-0.5 * b1 * b2 * t * t, 0.0);
        assert!((kappa[1] - k1).norm() <= 1e-2 * k1.norm(), "seed {seed}: {} vs {k1}", kappa[1]);
        assert!((kappa[2] - k2).norm() <= 1e-2 * k2.norm(), "seed {seed}: {} vs {k2}", kappa[2]);
    }
}

#[test]
fn chain_ode_agrees_with_spectral_amplitudes() {
    for seed in 0..10 {
        let dim = 3 + (seed as usize % 8);
        let h = gue(dim, 200 + seed);
        let psi = uniform_eigenstate_superposition(&h).unwrap().state;
        let basis = build_basis(&h, GeneratorOrder::FIRST, 1.0, &psi, DEFAULT_DEFLATION_TOL).unwrap();
        assert!(basis.grade() <= 10);
        let tau_h = compute_timescales(&h, basis.grade()).unwrap().tau_h;
        let grid = TimeGrid::new(0.0, 2.0 * tau_h, 400).unwrap();
        let lc = basis.lanczos_coefficients().unwrap();
        let ode = chain_ode_integrate(&lc.a, &lc.b, &grid).unwrap();
        let exact = amplitudes(&basis, &h, &psi, &grid).unwrap();
        for (c_ode, c_exact) in ode.complexity.iter().zip(&exact.complexity) {
            assert!((c_ode - c_exact).abs() <= 1e-6, "seed {seed}: {c_ode} vs {c_exact}");
        }
    }
}

#[test]
fn pauli_x_complexity_is_sin_squared() {
    let h = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let psi = StateVector::basis(2, 0);
    let basis = build_basis(&h, GeneratorOrder::FIRST, 1.0, &psi, DEFAULT_DEFLATION_TOL).unwrap();
    let grid = TimeGrid::new(0.0, 2.0 * PI, 629).unwrap();
    let trace = amplitudes(&basis, &h, &psi, &grid).unwrap();
    for (t, c) in grid.times().zip(&trace.complexity) {
        assert!((c - t.sin().powi(2)).abs() <= 1e-9);
    }
}

#[test]
fn dyson_terms_tie_at_scrambling_time() {
    for seed in 0..10 {
        let dim = 3 + seed as usize;
        let h = gue(dim, 300 + seed);
        let psi = uniform_eigenstate_superposition(&h).unwrap().state;
        let m = build_basis(&h, GeneratorOrder::FIRST, 1.0, &psi, DEFAULT_DEFLATION_TOL).unwrap().grade();
        let ts = compute_timescales(&h, m).unwrap();
        let before = dyson_term_norm(&h, ts.tau_scr, m as u32 - 1).unwrap();
        let at = dyson_term_norm(&h, ts.tau_scr, m as u32).unwrap();
        // Oracle: ||(Ht)^n/n!|| = (σt)^n/n! with σt = m, so m^(m-1)/(m-1)! = m^m/m!.
        let closed: f64 = (1..m).map(|k| m as f64 / k as f64).product();
        assert!((before - at).abs() <= 1e-9 * at, "seed {seed}: {before} vs {at}");
        assert!((at - closed).abs() <= 1e-9 * closed);
    }
}
