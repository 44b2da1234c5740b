//! Exact time evolution, Krylov amplitudes and spread complexity.
//!
//! The state is propagated through the spectrum of `H`, so the amplitudes
//! `κ_n(t) = ⟨b_n|ψ(t)⟩` carry no time-stepping error. The tight-binding
//! chain integrator [`chain_ode_integrate`] solves
//! `i dκ_n/dt = b_n κ_{n-1} + a_n κ_n + b_{n+1} κ_{n+1}` by RK4 and serves as
//! an independent check of the first-order traces.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::krylov::{GeneratorOrder, KrylovBasis};
use crate::linalg::{hermitian_eigendecompose, ComplexMatrix, Eigensystem, StateVector};

/// Rows of a trace may deviate from unit sum by at most this much before the
/// basis is declared incomplete.
pub const ROW_SUM_ERROR: f64 = 1e-6;

/// Uniform grid including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        if !(start >= 0.0) || !(stop > start) || !stop.is_finite() || points < 2 {
            return Err(Error::InvalidArgument(format!(
                "time grid needs 0 <= start < stop and at least 2 points, got [{start}, {stop}] x {points}"
            )));
        }
        Ok(Self { start, stop, points })
    }

    pub fn spacing(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.stop
        } else {
            self.start + i as f64 * self.spacing()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.time(i))
    }
}

/// Evolution of one initial state, `|ψ(t)⟩ = V e^{-iΛt} V^H |ψ0⟩`.
#[derive(Debug, Clone)]
pub struct Propagator {
    eig: Eigensystem,
    coefficients: Vec<Complex64>,
    psi0: StateVector,
}

impl Propagator {
    pub fn new(eig: Eigensystem, psi0: &StateVector) -> Result<Self> {
        if psi0.dim() != eig.dim() {
            return Err(Error::Dimension(format!("state has {} entries, spectrum has {}", psi0.dim(), eig.dim())));
        }
        let coefficients = eig.coefficients(psi0);
        Ok(Self { eig, coefficients, psi0: psi0.clone() })
    }

    pub fn from_hamiltonian(h: &ComplexMatrix, psi0: &StateVector) -> Result<Self> {
        Self::new(hermitian_eigendecompose(h)?, psi0)
    }

    pub fn eigensystem(&self) -> &Eigensystem {
        &self.eig
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.psi0
    }

    pub fn state_at(&self, t: f64) -> StateVector {
        if t == 0.0 {
            return self.psi0.clone();
        }
        self.eig.synthesize(&self.phased(t))
    }

    fn phased(&self, t: f64) -> Vec<Complex64> {
        self.coefficients
            .iter()
            .zip(&self.eig.eigenvalues)
            .map(|(c, &e)| c * Complex64::new(0.0, -e * t).exp())
            .collect()
    }

    /// `κ_n(t) = ⟨b_n|ψ(t)⟩` for every vector of `basis`.
    pub fn amplitudes_at(&self, basis: &KrylovBasis, t: f64) -> Vec<Complex64> {
        basis.overlaps(&self.state_at(t))
    }
}

/// `|ψ(t)⟩ = e^{-iHt}|ψ0⟩`.
pub fn evolve(h: &ComplexMatrix, psi0: &StateVector, t: f64) -> Result<StateVector> {
    Ok(Propagator::from_hamiltonian(h, psi0)?.state_at(t))
}

/// Occupations `|κ_n(t)|²` and `C(t) = Σ n |κ_n(t)|²` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityTrace {
    pub grid: TimeGrid,
    /// One row per time, one column per level.
    pub amplitudes_sq: Vec<Vec<f64>>,
    pub complexity: Vec<f64>,
    pub order: GeneratorOrder,
    pub dt: f64,
}

impl ComplexityTrace {
    fn from_rows(grid: TimeGrid, amplitudes_sq: Vec<Vec<f64>>, order: GeneratorOrder, dt: f64) -> Self {
        let complexity = amplitudes_sq.iter().map(|row| spread(row)).collect();
        Self { grid, amplitudes_sq, complexity, order, dt }
    }

    pub fn levels(&self) -> usize {
        self.amplitudes_sq.first().map_or(0, Vec::len)
    }

    /// Largest `|Σ_n |κ_n|² - 1|` over the grid.
    pub fn max_row_sum_error(&self) -> f64 {
        self.amplitudes_sq.iter().map(|r| (r.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Mean of `C(t)` over grid times with `lo <= t <= hi`; `None` if no grid
    /// point falls inside.
    pub fn mean_complexity(&self, lo: f64, hi: f64) -> Option<f64> {
        mean_in_window(&self.grid, &self.complexity, lo, hi)
    }
}

/// Mean of `values` over the grid times inside `[lo, hi]`.
pub fn mean_in_window(grid: &TimeGrid, values: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let (sum, count) = grid
        .times()
        .zip(values)
        .filter(|(t, _)| *t >= lo && *t <= hi)
        .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

fn spread(row: &[f64]) -> f64 {
    row.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
}

/// Spread complexity trace of `ψ(t)` in `basis`, by exact evolution.
pub fn amplitudes(basis: &KrylovBasis, h: &ComplexMatrix, psi0: &StateVector, grid: &TimeGrid) -> Result<ComplexityTrace> {
    amplitudes_with(basis, &Propagator::from_hamiltonian(h, psi0)?, grid)
}

/// As [`amplitudes`], reusing a propagator.
pub fn amplitudes_with(basis: &KrylovBasis, propagator: &Propagator, grid: &TimeGrid) -> Result<ComplexityTrace> {
    if basis.dim() != propagator.eig.dim() {
        return Err(Error::Dimension("basis and Hamiltonian dimensions differ".into()));
    }
    // weights[n][k] = <b_n|φ_k> <φ_k|ψ0>, so κ_n(t) = Σ_k weights[n][k] e^{-iε_k t}.
    let n_eig = propagator.eig.dim();
    let weights: Vec<Vec<Complex64>> = basis
        .vectors()
        .iter()
        .map(|b| {
            (0..n_eig)
                .map(|k| b.inner(&propagator.eig.eigenvectors.column(k)) * propagator.coefficients[k])
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(grid.points);
    for (i, t) in grid.times().enumerate() {
        let row: Vec<f64> = if t == 0.0 {
            basis.overlaps(&propagator.psi0).iter().map(|z| z.norm_sqr()).collect()
        } else {
            let phases: Vec<Complex64> =
                propagator.eig.eigenvalues.iter().map(|&e| Complex64::new(0.0, -e * t).exp()).collect();
            weights
                .iter()
                .map(|w| w.iter().zip(&phases).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr())
                .collect()
        };
        let row_sum: f64 = row.iter().sum();
        if (row_sum - 1.0).abs() > ROW_SUM_ERROR {
            return Err(Error::BasisIncomplete { time: grid.time(i), row_sum });
        }
        rows.push(row);
    }
    Ok(ComplexityTrace::from_rows(*grid, rows, basis.order, basis.dt))
}

/// Integrates the tight-binding chain from `κ(0) = (1, 0, …, 0)` with
/// classical RK4.
///
/// `b[n]` couples levels `n` and `n + 1`. The step is the grid spacing,
/// subdivided until it does not exceed `1e-3 / max(|a|_∞, |b|_∞, 1)`.
pub fn chain_ode_integrate(a: &[f64], b: &[f64], grid: &TimeGrid) -> Result<ComplexityTrace> {
    if a.is_empty() || b.len() + 1 != a.len() {
        return Err(Error::Dimension(format!("need m diagonal and m-1 hopping coefficients, got {} and {}", a.len(), b.len())));
    }
    if grid.start != 0.0 {
        return Err(Error::InvalidArgument("chain integration starts at t = 0".into()));
    }
    let scale = a.iter().chain(b).fold(1.0_f64, |m, x| m.max(x.abs()));
    let h_max = 1e-3 / scale;
    let spacing = grid.spacing();
    let substeps = (spacing / h_max).ceil().max(1.0) as usize;
    let h = spacing / substeps as f64;

    let m = a.len();
    let rhs = |k: &[Complex64], out: &mut [Complex64]| {
        for n in 0..m {
            let mut acc = a[n] * k[n];
            if n > 0 {
                acc += b[n - 1] * k[n - 1];
            }
            if n + 1 < m {
                acc += b[n] * k[n + 1];
            }
            out[n] = Complex64::new(acc.im, -acc.re); // -i * acc
        }
    };

    let zero = Complex64::new(0.0, 0.0);
    let mut kappa = vec![zero; m];
    kappa[0] = Complex64::new(1.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![zero; m], vec![zero; m], vec![zero; m], vec![zero; m], vec![zero; m]);

    let mut rows = Vec::with_capacity(grid.points);
    rows.push(kappa.iter().map(|z| z.norm_sqr()).collect::<Vec<f64>>());
    for _ in 1..grid.points {
        for _ in 0..substeps {
            rhs(&kappa, &mut k1);
            for n in 0..m {
                tmp[n] = kappa[n] + k1[n] * (h / 2.0);
            }
            rhs(&tmp, &mut k2);
            for n in 0..m {
                tmp[n] = kappa[n] + k2[n] * (h / 2.0);
            }
            rhs(&tmp, &mut k3);
            for n in 0..m {
                tmp[n] = kappa[n] + k3[n] * h;
            }
            rhs(&tmp, &mut k4);
            for n in 0..m {
                kappa[n] += (k1[n] + k2[n] * 2.0 + k3[n] * 2.0 + k4[n]) * (h / 6.0);
            }
        }
        let row: Vec<f64> = kappa.iter().map(|z| z.norm_sqr()).collect();
        let drift = (row.iter().sum::<f64>() - 1.0).abs();
        if drift > ROW_SUM_ERROR {
            return Err(Error::StepSize { drift, step: h });
        }
        rows.push(row);
    }
    Ok(ComplexityTrace::from_rows(*grid, rows, GeneratorOrder::FIRST, 0.0))
}

/// `ΔC(t) = C^(p)(t) - C^(1)(t)` pointwise.
pub fn complexity_difference(trace_p: &ComplexityTrace, trace_1: &ComplexityTrace) -> Result<Vec<f64>> {
    if trace_p.grid != trace_1.grid {
        return Err(Error::InvalidArgument("complexity traces are on different time grids".into()));
    }
    Ok(trace_p.complexity.iter().zip(&trace_1.complexity).map(|(p, q)| p - q).collect())
}
