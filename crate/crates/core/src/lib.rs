//! Krylov spread complexity of quantum state evolution for a family of
//! higher-order generators.
//!
//! A Hermitian Hamiltonian `H` and an initial state `|ψ0⟩` define a sequence
//! `|ψ0⟩, G|ψ0⟩, G²|ψ0⟩, …` for a generator `G`. Orthonormalizing it gives an
//! ordered basis `{|b_n⟩}`, and the spread complexity of the evolving state is
//! `C(t) = Σ n |⟨b_n|ψ(t)⟩|²`. The generator of order `p` is the order-`p`
//! Taylor truncation of `e^{-iHΔt}`; `p = 1` recovers the usual Lanczos
//! (Krylov) basis and `p = ∞` the unitary step itself.
//!
//! Modules:
//!
//! - [`linalg`]: dense complex matrices, Jacobi eigensolver, Gram-Schmidt.
//! - [`ensemble`]: seeded GUE sampling and the uniform eigenstate superposition.
//! - [`krylov`]: generators, Krylov sequences and bases, Lanczos coefficients.
//! - [`dynamics`]: exact evolution, amplitudes, complexity traces and the
//!   tight-binding chain integrator.
//! - [`timescales`]: Dyson-term norms, scrambling and Heisenberg times.
//! - [`analysis`]: projected Hamiltonians, bandwidth metrics and the
//!   randomized check that the unitary generator beats the Krylov basis.
//!
//! The guide under `book/` walks through each concept; its Rust snippets are
//! compiled and run as doctests of this crate (the experiments chapter runs
//! under `krylov-lab`).

pub mod analysis;
pub mod dynamics;
pub mod ensemble;
mod error;
pub mod krylov;
pub mod linalg;
pub mod timescales;

pub use error::{Error, Result};
pub use num_complex::Complex64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/generators.md")]
    mod generators {}
    #[doc = include_str!("../../../book/src/complexity.md")]
    mod complexity {}
    #[doc = include_str!("../../../book/src/timescales.md")]
    mod timescales {}
    #[doc = include_str!("../../../book/src/non_optimality.md")]
    mod non_optimality {}
    #[doc = include_str!("../../../book/src/projected.md")]
    mod projected {}
}
