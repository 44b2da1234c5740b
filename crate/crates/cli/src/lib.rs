//! Config-driven experiment runner for Krylov spread complexity.
//!
//! [`config`] parses the flat `key = value` files, [`runner`] executes the
//! three experiments (`fig1_small`, `fig2_gue`, `theorem1`) and writes CSV
//! traces, projected-Hamiltonian CSVs and JSON metadata.

pub mod config;
pub mod runner;

pub use config::{ConfigError, DtMode, Experiment, ExperimentConfig, GridUnits};
pub use runner::{run, simulate, simulate_theorem1, Outcome, RunError, RunSummary};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book_experiments {}
