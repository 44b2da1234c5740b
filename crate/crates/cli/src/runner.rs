//! Experiment execution and output files.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use krylov_core::analysis::{
    bandwidth_profile, project_hamiltonian, verify_theorem1, BandwidthProfile, ProjectedMatrix, TauSweep, Theorem1Report,
};
use krylov_core::dynamics::{amplitudes_with, complexity_difference, ComplexityTrace, Propagator, TimeGrid};
use krylov_core::ensemble::{sample_gue, superposition_from, EnsembleSpec};
use krylov_core::krylov::{build_basis_from_eigensystem, BasisOptions, Convention, GeneratorOrder};
use krylov_core::linalg::{hermitian_eigendecompose, ComplexMatrix};
use krylov_core::timescales::{timescales_from, TimescaleReport};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, DtMode, Experiment, ExperimentConfig, GridUnits};

/// Emitted traces must have unit row sums to this accuracy.
pub const EMIT_ROW_SUM_TOL: f64 = 1e-9;

/// Late-time window, in units of `τ_H`, for the empirical plateau.
pub const PLATEAU_WINDOW: (f64, f64) = (1.5, 3.0);

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "KRYLOV_LAB_THREADS";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numeric error: {0}")]
    Numeric(#[from] krylov_core::Error),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// Process exit status: 2 for configuration and I/O problems, 3 for
    /// numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io { .. } => 2,
            RunError::Numeric(e) if !e.is_numeric() => 2,
            RunError::Numeric(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            3 => "numeric",
            _ if matches!(self, RunError::Io { .. }) => "io",
            _ => "config",
        }
    }

    /// Machine-readable error record.
    pub fn to_json(&self) -> serde_json::Value {
        json!({ "status": "error", "kind": self.kind(), "exit_code": self.exit_code(), "message": self.to_string() })
    }
}

/// One `(order, Δt)` result.
#[derive(Debug, Clone)]
pub struct Cell {
    pub order: GeneratorOrder,
    pub dt: f64,
    /// `Δt / Δt_scr`.
    pub alpha: f64,
    pub grade: usize,
    pub trace: ComplexityTrace,
    /// `C^(p)(t) - C^(1)(t)`.
    pub delta: Vec<f64>,
    pub projected: ProjectedMatrix,
    pub band: BandwidthProfile,
}

/// In-memory result of a trace experiment.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub config: ExperimentConfig,
    pub hamiltonian: ComplexMatrix,
    pub timescales: TimescaleReport,
    pub grid: TimeGrid,
    pub min_gap: f64,
    pub degenerate: bool,
    pub cells: Vec<Cell>,
}

impl Outcome {
    pub fn cell(&self, order: GeneratorOrder, dt: f64) -> Option<&Cell> {
        self.cells.iter().find(|c| c.order == order && c.dt == dt)
    }

    pub fn dt_values(&self) -> Vec<f64> {
        let mut dts: Vec<f64> = Vec::new();
        for c in &self.cells {
            if !dts.contains(&c.dt) {
                dts.push(c.dt);
            }
        }
        dts
    }
}

/// Worker pool honoring `KRYLOV_LAB_THREADS`.
pub fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0) {
        builder = builder.num_threads(n);
    }
    builder.build().expect("thread pool")
}

/// Runs a fig1/fig2-style experiment without touching the filesystem.
pub fn simulate(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    config.check()?;
    if config.experiment == Experiment::Theorem1 {
        return Err(ConfigError { line: None, key: Some("experiment".into()), message: "theorem1 produces no traces".into() }.into());
    }
    let spec = EnsembleSpec::new(config.dim, config.seed).normalized(config.normalize);
    let h = sample_gue(&spec)?;
    let eig = hermitian_eigendecompose(&h)?;
    let sup = superposition_from(eig);
    let propagator = Propagator::new(sup.eigensystem.clone(), &sup.state)?;
    let convention = if config.conjugate_generator { Convention::Conjugate } else { Convention::Propagator };

    let options = |order, dt| BasisOptions { order, dt, deflation_tol: config.deflation_tol, convention };
    let first = build_basis_from_eigensystem(&h, &sup.eigensystem, &sup.state, &options(GeneratorOrder::FIRST, 1.0))?;
    let timescales = timescales_from(&sup.eigensystem, first.grade())?;

    let scale = match config.grid_units {
        GridUnits::Absolute => 1.0,
        GridUnits::Heisenberg => timescales.tau_h,
    };
    let grid = TimeGrid::new(config.grid_start * scale, config.grid_stop * scale, config.grid_points)?;
    let dts: Vec<f64> = config
        .dt_values
        .iter()
        .map(|&v| match config.dt_mode {
            DtMode::Absolute => v,
            DtMode::ScramblingMultiple => v * timescales.dt_scr,
        })
        .collect();

    let first_trace = amplitudes_with(&first, &propagator, &grid)?;
    let first_projected = project_hamiltonian(&first, &h)?;

    let jobs: Vec<(f64, GeneratorOrder)> =
        dts.iter().flat_map(|&dt| config.orders.iter().map(move |&o| (dt, o))).collect();
    let cells = thread_pool().install(|| {
        jobs.par_iter()
            .map(|&(dt, order)| -> Result<Cell, RunError> {
                let (basis_grade, trace, projected) = if order.is_first() {
                    (first.grade(), first_trace.clone(), first_projected.clone())
                } else {
                    let basis = build_basis_from_eigensystem(&h, &sup.eigensystem, &sup.state, &options(order, dt))?;
                    let trace = amplitudes_with(&basis, &propagator, &grid)?;
                    (basis.grade(), trace, project_hamiltonian(&basis, &h)?)
                };
                let mut trace = trace;
                trace.dt = dt;
                let mut projected = projected;
                projected.dt = dt;
                projected.support_threshold = config.support_threshold;
                let band = bandwidth_profile(&projected)?;
                let delta = complexity_difference(&trace, &first_trace)?;
                Ok(Cell { order, dt, alpha: dt / timescales.dt_scr, grade: basis_grade, trace, delta, projected, band })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    Ok(Outcome {
        config: config.clone(),
        hamiltonian: h,
        timescales,
        grid,
        min_gap: sup.min_gap,
        degenerate: sup.degenerate,
        cells,
    })
}

/// Theorem sweep configured by `config`.
pub fn simulate_theorem1(config: &ExperimentConfig) -> Result<Theorem1Report, RunError> {
    config.check()?;
    let sweep = TauSweep { min_fraction: config.tau_min_fraction, max_fraction: 1.0, points: config.tau_points };
    Ok(verify_theorem1(config.trials, config.dim, &sweep, config.seed)?)
}

/// Files written by [`run`].
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub experiment: Experiment,
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    /// Theorem sweep headline numbers, when the experiment ran one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_margin: Option<f64>,
}

/// Executes the experiment and writes its files into `config.output_dir`.
pub fn run(config: &ExperimentConfig) -> Result<RunSummary, RunError> {
    config.check()?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.clone(), source })?;
    let mut files = Vec::new();
    let mut headline = None;
    match config.experiment {
        Experiment::Theorem1 => {
            let report = simulate_theorem1(config)?;
            headline = Some((report.violations, report.min_margin));
            let value = json!({ "config": config, "report": report });
            write_json(dir, "theorem1.json", &value, &mut files)?;
        }
        Experiment::Fig1Small | Experiment::Fig2Gue => {
            let outcome = simulate(config)?;
            let mut cells_meta = Vec::new();
            for cell in &outcome.cells {
                let row_err = cell.trace.max_row_sum_error();
                if row_err > EMIT_ROW_SUM_TOL {
                    return Err(krylov_core::Error::BasisIncomplete { time: f64::NAN, row_sum: 1.0 + row_err }.into());
                }
                let stem = format!("p{}_dt{}", cell.order, format_dt(cell.dt));
                let trace_name = format!("trace_{stem}.csv");
                let hessian_name = format!("hessian_{stem}.csv");
                write_file(dir, &trace_name, &trace_csv(cell, outcome.timescales.tau_h)?, &mut files)?;
                write_file(dir, &hessian_name, &hessian_csv(&cell.projected)?, &mut files)?;
                let tau_h = outcome.timescales.tau_h;
                let plateau = cell.trace.mean_complexity(PLATEAU_WINDOW.0 * tau_h, PLATEAU_WINDOW.1 * tau_h);
                cells_meta.push(json!({
                    "order": cell.order,
                    "dt": cell.dt,
                    "alpha": cell.alpha,
                    "grade": cell.grade,
                    "trace_file": trace_name,
                    "hessian_file": hessian_name,
                    "max_band": cell.band.max_band,
                    "mean_band": cell.band.mean_band,
                    "late_time_average": plateau,
                    "max_row_sum_error": row_err,
                    "min_delta_c": cell.delta.iter().cloned().fold(f64::INFINITY, f64::min),
                    "max_delta_c": cell.delta.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                }));
            }
            let ts = &outcome.timescales;
            let value = json!({
                "h_norm": ts.h_norm,
                "grade": ts.grade,
                "tau_scr": ts.tau_scr,
                "dt_scr": ts.dt_scr,
                "mean_spacing": ts.mean_spacing,
                "tau_H": ts.tau_h,
                "tau_H_over_tau_scr": ts.heisenberg_over_scrambling(),
                "seed": config.seed,
                "initial_state": "uniform superposition of all eigenstates, ascending eigenvalues, each eigenvector phase-fixed so its largest-magnitude entry is real positive",
                "min_eigen_gap": outcome.min_gap,
                "degenerate_spectrum": outcome.degenerate,
                "plateau_window_over_tau_H": [PLATEAU_WINDOW.0, PLATEAU_WINDOW.1],
                "cells": cells_meta,
                "config": config,
            });
            write_json(dir, "timescales.json", &value, &mut files)?;
        }
    }
    Ok(RunSummary {
        experiment: config.experiment,
        output_dir: dir.clone(),
        files,
        violations: headline.map(|h| h.0),
        min_margin: headline.map(|h| h.1),
    })
}

/// `Δt` as used in file names: six significant digits, shortest form.
pub fn format_dt(dt: f64) -> String {
    let rounded: f64 = format!("{dt:.5e}").parse().expect("formatted float parses");
    rounded.to_string()
}

/// 17 significant digits.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_bytes(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(w.into_inner().expect("in-memory writer"))
}

/// Trace CSV: `t, t_over_tauH, C, dC_vs_p1, k0_sq, …`.
pub fn trace_csv(cell: &Cell, tau_h: f64) -> Result<Vec<u8>, RunError> {
    let levels = cell.trace.levels();
    let mut header: Vec<String> = ["t", "t_over_tauH", "C", "dC_vs_p1"].iter().map(|s| s.to_string()).collect();
    header.extend((0..levels).map(|n| format!("k{n}_sq")));
    let rows = cell.trace.grid.times().enumerate().map(|(i, t)| {
        let mut row = vec![fmt_f64(t), fmt_f64(t / tau_h), fmt_f64(cell.trace.complexity[i]), fmt_f64(cell.delta[i])];
        row.extend(cell.trace.amplitudes_sq[i].iter().map(|&p| fmt_f64(p)));
        row
    });
    csv_bytes(header, rows).map_err(|e| RunError::Io { path: PathBuf::from("<trace>"), source: e.into() })
}

/// Projected-Hamiltonian magnitudes, `m` columns `c0 … c{m-1}`.
pub fn hessian_csv(m: &ProjectedMatrix) -> Result<Vec<u8>, RunError> {
    let mags = m.magnitudes();
    let header = (0..mags.len()).map(|j| format!("c{j}")).collect();
    let rows = mags.into_iter().map(|r| r.into_iter().map(fmt_f64).collect());
    csv_bytes(header, rows).map_err(|e| RunError::Io { path: PathBuf::from("<hessian>"), source: e.into() })
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], files: &mut Vec<String>) -> Result<(), RunError> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path).map_err(|source| RunError::Io { path: path.clone(), source })?;
    f.write_all(bytes).map_err(|source| RunError::Io { path: path.clone(), source })?;
    files.push(name.to_string());
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value, files: &mut Vec<String>) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    write_file(dir, name, text.as_bytes(), files)
}
