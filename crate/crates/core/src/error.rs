use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the numerical routines.
///
/// Variants split into two families: structural errors (bad shapes, bad
/// arguments) and numeric errors (an algorithm could not meet its accuracy
/// contract). [`Error::is_numeric`] tells them apart.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian: max |A - A^H| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Jacobi eigensolver did not converge within the cap of {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("Krylov basis incomplete: amplitudes at t = {time} sum to {row_sum} (grade detection failed upstream)")]
    BasisIncomplete { time: f64, row_sum: f64 },

    #[error("chain integration drifted from unit norm by {drift:e}; use a smaller step than {step:e}")]
    StepSize { drift: f64, step: f64 },

    #[error("mean level spacing is zero (fully degenerate spectrum); Heisenberg time undefined")]
    DegenerateSpectrum,

    #[error("no matrix entry exceeds the support threshold {threshold:e}")]
    EmptySupport { threshold: f64 },
}

impl Error {
    /// True when the failure is an accuracy/convergence problem rather than
    /// malformed input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::BasisIncomplete { .. }
                | Error::StepSize { .. }
                | Error::DegenerateSpectrum
                | Error::EmptySupport { .. }
        )
    }
}
