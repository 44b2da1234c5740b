//! Generators `G^(p,Δt)`, the sequences they produce from `|ψ0⟩`, and the
//! orthonormal bases those sequences span.
//!
//! Order 1 reduces to `H` itself, and its basis is built by the Lanczos
//! three-term recurrence (with full reorthogonalization) so that the
//! coefficients `a_n`, `b_n` come out alongside. Orders `p ≥ 2` and the
//! infinite order use `G = Σ_{k=1}^{p} (-iΔt)^{k-1} H^k / k!` and
//! `G = e^{-iHΔt}` respectively, orthonormalized in Arnoldi form: the next
//! candidate is `G` applied to the newest basis vector, which spans the same
//! nested subspaces as `G^k|ψ0⟩` without forming ill-conditioned powers.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigendecompose, project_out, ComplexMatrix, Eigensystem, StateVector,
};

/// Truncation order of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorOrder {
    Finite(u32),
    Infinite,
}

impl GeneratorOrder {
    pub const FIRST: GeneratorOrder = GeneratorOrder::Finite(1);

    pub fn is_first(self) -> bool {
        self == Self::FIRST
    }

    fn validate(self) -> Result<()> {
        match self {
            GeneratorOrder::Finite(0) => Err(Error::InvalidArgument("generator order must be at least 1".into())),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GeneratorOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorOrder::Finite(p) => write!(f, "{p}"),
            GeneratorOrder::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for GeneratorOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" | "∞" => Ok(GeneratorOrder::Infinite),
            t => match t.parse::<u32>() {
                Ok(p) if p >= 1 => Ok(GeneratorOrder::Finite(p)),
                _ => Err(Error::InvalidArgument(format!("invalid generator order {t:?}; expected a positive integer or \"inf\""))),
            },
        }
    }
}

impl Serialize for GeneratorOrder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Sign of `i` in the generator's exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `e^{-iHΔt}`, the Schrödinger propagator.
    #[default]
    Propagator,
    /// `e^{+iHΔt}`.
    Conjugate,
}

impl Convention {
    fn unit(self) -> Complex64 {
        match self {
            Convention::Propagator => Complex64::new(0.0, -1.0),
            Convention::Conjugate => Complex64::new(0.0, 1.0),
        }
    }
}

/// `G^(p,Δt)` with the identity and one factor of `-iΔt` removed.
pub fn build_generator(h: &ComplexMatrix, order: GeneratorOrder, dt: f64) -> Result<ComplexMatrix> {
    build_generator_with(h, order, dt, Convention::Propagator)
}

pub fn build_generator_with(
    h: &ComplexMatrix,
    order: GeneratorOrder,
    dt: f64,
    convention: Convention,
) -> Result<ComplexMatrix> {
    order.validate()?;
    h.ensure_hermitian()?;
    if order.is_first() {
        return Ok(h.clone());
    }
    check_dt(dt)?;
    match order {
        GeneratorOrder::Finite(p) => {
            let step = convention.unit() * dt;
            let mut term = h.clone();
            let mut g = h.clone();
            for k in 2..=p {
                term = term.matmul(h)?.scaled(step / k as f64);
                g = g.add_scaled(&term, Complex64::new(1.0, 0.0))?;
            }
            Ok(g)
        }
        GeneratorOrder::Infinite => {
            let eig = hermitian_eigendecompose(h)?;
            Ok(unitary_step(&eig, dt, convention))
        }
    }
}

/// `e^{∓iHΔt}` from a precomputed eigensystem.
pub fn unitary_step(eig: &Eigensystem, dt: f64, convention: Convention) -> ComplexMatrix {
    let unit = convention.unit();
    eig.map(|e| (unit * e * dt).exp())
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("generator time step must be positive for order > 1, got {dt}")))
    }
}

/// Unit-normalized powers `ψ0, Gψ0, G²ψ0, …`.
#[derive(Debug, Clone)]
pub struct KrylovSequence {
    pub vectors: Vec<StateVector>,
    /// Set when `G` annihilated the sequence before `max_len` entries.
    pub truncated: bool,
}

pub fn krylov_sequence(g: &ComplexMatrix, psi0: &StateVector, max_len: usize) -> Result<KrylovSequence> {
    if max_len == 0 {
        return Err(Error::InvalidArgument("sequence length must be at least 1".into()));
    }
    if g.cols() != psi0.dim() {
        return Err(Error::Dimension(format!("generator is {}x{}, state has {} entries", g.rows(), g.cols(), psi0.dim())));
    }
    let mut vectors = vec![psi0.clone()];
    while vectors.len() < max_len {
        let next = g.apply(vectors.last().expect("sequence is non-empty"))?;
        match next.normalized() {
            Some(v) => vectors.push(v),
            None => return Ok(KrylovSequence { vectors, truncated: true }),
        }
    }
    Ok(KrylovSequence { vectors, truncated: false })
}

/// Diagonal and off-diagonal Lanczos coefficients. `a` has one entry per
/// basis vector, `b` one fewer (`b[n]` couples levels `n` and `n + 1`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanczosCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Options for [`build_basis_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisOptions {
    pub order: GeneratorOrder,
    pub dt: f64,
    pub deflation_tol: f64,
    pub convention: Convention,
}

impl BasisOptions {
    pub fn new(order: GeneratorOrder, dt: f64) -> Self {
        Self { order, dt, deflation_tol: crate::linalg::DEFAULT_DEFLATION_TOL, convention: Convention::Propagator }
    }
}

/// Ordered orthonormal basis induced by one generator.
#[derive(Debug, Clone)]
pub struct KrylovBasis {
    pub order: GeneratorOrder,
    pub dt: f64,
    pub deflation_tol: f64,
    pub convention: Convention,
    vectors: Vec<StateVector>,
    lanczos: Option<LanczosCoefficients>,
    /// Relative residual norm of each accepted candidate (one per vector after
    /// the first).
    pub residuals: Vec<f64>,
    /// Relative residual of the candidate that stopped growth, if one did
    /// (growth also stops once the grade reaches the dimension).
    pub deflated_residual: Option<f64>,
}

impl KrylovBasis {
    pub fn grade(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    /// Recorded Lanczos coefficients; only defined for the first-order basis.
    pub fn lanczos_coefficients(&self) -> Result<&LanczosCoefficients> {
        self.lanczos.as_ref().ok_or_else(|| {
            Error::InvalidArgument(format!("Lanczos coefficients are only defined for order 1, basis has order {}", self.order))
        })
    }

    /// `<b_n|v>` for every basis vector.
    pub fn overlaps(&self, v: &StateVector) -> Vec<Complex64> {
        self.vectors.iter().map(|b| b.inner(v)).collect()
    }
}

/// Builds the basis with the propagator sign convention.
pub fn build_basis(
    h: &ComplexMatrix,
    order: GeneratorOrder,
    dt: f64,
    psi0: &StateVector,
    deflation_tol: f64,
) -> Result<KrylovBasis> {
    build_basis_with(h, psi0, &BasisOptions { deflation_tol, ..BasisOptions::new(order, dt) })
}

pub fn build_basis_with(h: &ComplexMatrix, psi0: &StateVector, opts: &BasisOptions) -> Result<KrylovBasis> {
    opts.order.validate()?;
    h.ensure_hermitian()?;
    check_state(h, psi0)?;
    if !(opts.deflation_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("deflation tolerance must be positive, got {}", opts.deflation_tol)));
    }
    if opts.order.is_first() {
        Ok(lanczos(h, psi0, opts))
    } else {
        let g = build_generator_with(h, opts.order, opts.dt, opts.convention)?;
        Ok(arnoldi(&g, psi0, opts))
    }
}

/// Same as [`build_basis_with`], reusing an eigensystem of `h` for the
/// infinite-order generator.
pub fn build_basis_from_eigensystem(
    h: &ComplexMatrix,
    eig: &Eigensystem,
    psi0: &StateVector,
    opts: &BasisOptions,
) -> Result<KrylovBasis> {
    if opts.order != GeneratorOrder::Infinite {
        return build_basis_with(h, psi0, opts);
    }
    check_dt(opts.dt)?;
    check_state(h, psi0)?;
    let g = unitary_step(eig, opts.dt, opts.convention);
    Ok(arnoldi(&g, psi0, opts))
}

fn check_state(h: &ComplexMatrix, psi0: &StateVector) -> Result<()> {
    if psi0.dim() != h.rows() {
        return Err(Error::Dimension(format!("state has {} entries, Hamiltonian is {}x{}", psi0.dim(), h.rows(), h.cols())));
    }
    let norm = psi0.norm();
    if (norm * norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("initial state must have unit norm, got {norm}")));
    }
    Ok(())
}

fn lanczos(h: &ComplexMatrix, psi0: &StateVector, opts: &BasisOptions) -> KrylovBasis {
    let dim = psi0.dim();
    let mut vectors = vec![psi0.clone()];
    let mut a = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let mut residuals = Vec::new();
    let mut deflated_residual = None;
    loop {
        let n = vectors.len() - 1;
        let w = h.apply(&vectors[n]).expect("dimensions checked");
        let an = vectors[n].inner(&w).re;
        a.push(an);
        if vectors.len() == dim {
            break;
        }
        let mut r = w.clone();
        r.axpy(Complex64::new(-an, 0.0), &vectors[n]);
        if n > 0 {
            r.axpy(Complex64::new(-b[n - 1], 0.0), &vectors[n - 1]);
        }
        project_out(&vectors, &mut r);
        let beta = r.norm();
        let scale = w.norm();
        if scale == 0.0 || beta < opts.deflation_tol * scale {
            deflated_residual = Some(if scale == 0.0 { 0.0 } else { beta / scale });
            break;
        }
        r.scale(Complex64::new(1.0 / beta, 0.0));
        b.push(beta);
        residuals.push(beta / scale);
        vectors.push(r);
    }
    KrylovBasis {
        order: opts.order,
        dt: opts.dt,
        deflation_tol: opts.deflation_tol,
        convention: opts.convention,
        vectors,
        lanczos: Some(LanczosCoefficients { a, b }),
        residuals,
        deflated_residual,
    }
}

fn arnoldi(g: &ComplexMatrix, psi0: &StateVector, opts: &BasisOptions) -> KrylovBasis {
    let dim = psi0.dim();
    let mut vectors = vec![psi0.clone()];
    let mut residuals = Vec::new();
    let mut deflated_residual = None;
    while vectors.len() < dim {
        let w = g.apply(vectors.last().expect("basis is non-empty")).expect("dimensions checked");
        let scale = w.norm();
        let mut r = w;
        project_out(&vectors, &mut r);
        let residual = r.norm();
        if scale == 0.0 || residual < opts.deflation_tol * scale {
            deflated_residual = Some(if scale == 0.0 { 0.0 } else { residual / scale });
            break;
        }
        r.scale(Complex64::new(1.0 / residual, 0.0));
        residuals.push(residual / scale);
        vectors.push(r);
    }
    KrylovBasis {
        order: opts.order,
        dt: opts.dt,
        deflation_tol: opts.deflation_tol,
        convention: opts.convention,
        vectors,
        lanczos: None,
        residuals,
        deflated_residual,
    }
}
