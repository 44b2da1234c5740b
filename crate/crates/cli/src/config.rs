//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Every key is optional; missing keys take the defaults of the selected
//! `experiment`. Unknown or repeated keys are errors.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use krylov_core::krylov::GeneratorOrder;
use serde::Serialize;
use thiserror::Error;

/// Seed shipped with the small three-level experiment.
pub const FIG1_SEED: u64 = 7;
/// Seed shipped with the N = 50 experiment.
pub const FIG2_SEED: u64 = 2024;
/// Seed shipped with the randomized theorem sweep.
pub const THEOREM1_SEED: u64 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{}{message}", location(*line, key.as_deref()))]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

fn location(line: Option<usize>, key: Option<&str>) -> String {
    match (line, key) {
        (Some(l), Some(k)) => format!("line {l}, key `{k}`: "),
        (Some(l), None) => format!("line {l}: "),
        (None, Some(k)) => format!("key `{k}`: "),
        (None, None) => String::new(),
    }
}

impl ConfigError {
    fn at(line: usize, key: &str, message: impl Into<String>) -> Self {
        Self { line: Some(line), key: Some(key.to_string()), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Fig1Small,
    Fig2Gue,
    Theorem1,
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fig1_small" => Ok(Self::Fig1Small),
            "fig2_gue" => Ok(Self::Fig2Gue),
            "theorem1" => Ok(Self::Theorem1),
            _ => Err(format!("unknown experiment {s:?}; expected fig1_small, fig2_gue or theorem1")),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fig1Small => "fig1_small",
            Self::Fig2Gue => "fig2_gue",
            Self::Theorem1 => "theorem1",
        })
    }
}

/// How `dt_values` are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DtMode {
    /// Values are the generator step `Δt` itself.
    Absolute,
    /// Values are multiples `α` of `Δt_scr = 1/||H||`.
    ScramblingMultiple,
}

impl FromStr for DtMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "absolute" => Ok(Self::Absolute),
            "scrambling_multiple" => Ok(Self::ScramblingMultiple),
            _ => Err(format!("unknown dt_mode {s:?}; expected absolute or scrambling_multiple")),
        }
    }
}

impl fmt::Display for DtMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Absolute => "absolute",
            Self::ScramblingMultiple => "scrambling_multiple",
        })
    }
}

/// Units of `grid_start` / `grid_stop`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridUnits {
    Absolute,
    /// Multiples of the Heisenberg time `τ_H`.
    Heisenberg,
}

impl FromStr for GridUnits {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "absolute" => Ok(Self::Absolute),
            "heisenberg" => Ok(Self::Heisenberg),
            _ => Err(format!("unknown grid_units {s:?}; expected absolute or heisenberg")),
        }
    }
}

impl fmt::Display for GridUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Absolute => "absolute",
            Self::Heisenberg => "heisenberg",
        })
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dim: usize,
    pub seed: u64,
    pub orders: Vec<GeneratorOrder>,
    pub dt_mode: DtMode,
    pub dt_values: Vec<f64>,
    pub grid_units: GridUnits,
    pub grid_start: f64,
    pub grid_stop: f64,
    pub grid_points: usize,
    pub normalize: bool,
    pub conjugate_generator: bool,
    pub deflation_tol: f64,
    pub support_threshold: f64,
    pub trials: usize,
    pub tau_points: usize,
    pub tau_min_fraction: f64,
    pub output_dir: PathBuf,
}

const KEYS: &[&str] = &[
    "experiment",
    "dim",
    "seed",
    "orders",
    "dt_mode",
    "dt_values",
    "grid_units",
    "grid_start",
    "grid_stop",
    "grid_points",
    "normalize",
    "conjugate_generator",
    "deflation_tol",
    "support_threshold",
    "trials",
    "tau_points",
    "tau_min_fraction",
    "output_dir",
];

impl ExperimentConfig {
    /// Defaults of one experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let all_orders =
            vec![GeneratorOrder::FIRST, GeneratorOrder::Finite(2), GeneratorOrder::Finite(3), GeneratorOrder::Infinite];
        let base = Self {
            experiment,
            dim: 3,
            seed: FIG1_SEED,
            orders: all_orders,
            dt_mode: DtMode::Absolute,
            dt_values: vec![2.0],
            grid_units: GridUnits::Absolute,
            grid_start: 0.0,
            grid_stop: 6.0,
            grid_points: 601,
            normalize: true,
            conjugate_generator: false,
            deflation_tol: krylov_core::linalg::DEFAULT_DEFLATION_TOL,
            support_threshold: krylov_core::analysis::DEFAULT_SUPPORT_THRESHOLD,
            trials: 100,
            tau_points: 20,
            tau_min_fraction: 1e-2,
            output_dir: PathBuf::from(format!("out/{experiment}")),
        };
        match experiment {
            Experiment::Fig1Small => base,
            Experiment::Fig2Gue => Self {
                dim: 50,
                seed: FIG2_SEED,
                dt_mode: DtMode::ScramblingMultiple,
                dt_values: vec![0.2, 1.0, 1.5],
                grid_units: GridUnits::Heisenberg,
                grid_start: 0.0,
                grid_stop: 3.0,
                grid_points: 900,
                normalize: false,
                ..base
            },
            Experiment::Theorem1 => Self { seed: THEOREM1_SEED, normalize: false, ..base },
        }
    }

    /// Parses config text; the `experiment` key (default `fig1_small`)
    /// selects the defaults that other keys override.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError { line: Some(line_no), key: None, message: format!("expected `key = value`, got {line:?}") })?;
            let key = key.trim();
            let value = value.trim();
            if !KEYS.contains(&key) {
                return Err(ConfigError::at(line_no, key, format!("unknown key `{key}`")));
            }
            if let Some((first, ..)) = entries.iter().find(|(_, k, _)| k == key) {
                return Err(ConfigError::at(line_no, key, format!("duplicate key (first set on line {first})")));
            }
            if value.is_empty() {
                return Err(ConfigError::at(line_no, key, "missing value"));
            }
            entries.push((line_no, key.to_string(), value.to_string()));
        }

        let experiment = match entries.iter().find(|(_, k, _)| k == "experiment") {
            Some((line, key, value)) => value.parse().map_err(|e: String| ConfigError::at(*line, key, e))?,
            None => Experiment::Fig1Small,
        };
        let mut cfg = Self::defaults(experiment);
        for (line, key, value) in &entries {
            cfg.set(key, value).map_err(|e| ConfigError::at(*line, key, e))?;
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "experiment" => {}
            "dim" => self.dim = parse_num(value)?,
            "seed" => self.seed = parse_num(value)?,
            "orders" => {
                self.orders = value
                    .split(',')
                    .map(|s| s.trim().parse::<GeneratorOrder>().map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()?
            }
            "dt_mode" => self.dt_mode = value.parse()?,
            "dt_values" => self.dt_values = value.split(',').map(|s| parse_num(s.trim())).collect::<Result<_, _>>()?,
            "grid_units" => self.grid_units = value.parse()?,
            "grid_start" => self.grid_start = parse_num(value)?,
            "grid_stop" => self.grid_stop = parse_num(value)?,
            "grid_points" => self.grid_points = parse_num(value)?,
            "normalize" => self.normalize = parse_bool(value)?,
            "conjugate_generator" => self.conjugate_generator = parse_bool(value)?,
            "deflation_tol" => self.deflation_tol = parse_num(value)?,
            "support_threshold" => self.support_threshold = parse_num(value)?,
            "trials" => self.trials = parse_num(value)?,
            "tau_points" => self.tau_points = parse_num(value)?,
            "tau_min_fraction" => self.tau_min_fraction = parse_num(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => unreachable!("keys are checked against KEYS"),
        }
        Ok(())
    }

    /// Cross-field invariants.
    pub fn check(&self) -> Result<(), ConfigError> {
        let err = |key: &str, msg: &str| Err(ConfigError { line: None, key: Some(key.into()), message: msg.into() });
        if self.orders.is_empty() {
            return err("orders", "at least one order is required");
        }
        if !self.orders.contains(&GeneratorOrder::FIRST) {
            return err("orders", "baseline order 1 required");
        }
        let mut seen = self.orders.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.orders.len() {
            return err("orders", "orders must be distinct");
        }
        let min_dim = if self.experiment == Experiment::Theorem1 { 3 } else { 2 };
        if self.dim < min_dim {
            return err("dim", &format!("dimension must be at least {min_dim}"));
        }
        if self.dt_values.is_empty() || self.dt_values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return err("dt_values", "values must be positive and finite");
        }
        if !(self.grid_start >= 0.0) || !(self.grid_stop > self.grid_start) || !self.grid_stop.is_finite() {
            return err("grid_stop", "grid needs 0 <= grid_start < grid_stop");
        }
        if self.grid_points < 2 {
            return err("grid_points", "need at least 2 grid points");
        }
        if !(self.deflation_tol > 0.0) {
            return err("deflation_tol", "must be positive");
        }
        if !(self.support_threshold > 0.0) {
            return err("support_threshold", "must be positive");
        }
        if self.trials == 0 {
            return err("trials", "need at least one trial");
        }
        if self.tau_points == 0 {
            return err("tau_points", "need at least one tau value");
        }
        if !(self.tau_min_fraction > 0.0 && self.tau_min_fraction <= 1.0) {
            return err("tau_min_fraction", "must lie in (0, 1]");
        }
        Ok(())
    }

    /// Resolved configuration in the input format, one key per line.
    pub fn to_config_string(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        let lines = [
            ("experiment", self.experiment.to_string()),
            ("dim", self.dim.to_string()),
            ("seed", self.seed.to_string()),
            ("orders", join(self.orders.iter().map(ToString::to_string).collect())),
            ("dt_mode", self.dt_mode.to_string()),
            ("dt_values", join(self.dt_values.iter().map(ToString::to_string).collect())),
            ("grid_units", self.grid_units.to_string()),
            ("grid_start", self.grid_start.to_string()),
            ("grid_stop", self.grid_stop.to_string()),
            ("grid_points", self.grid_points.to_string()),
            ("normalize", self.normalize.to_string()),
            ("conjugate_generator", self.conjugate_generator.to_string()),
            ("deflation_tol", format!("{:e}", self.deflation_tol)),
            ("support_threshold", format!("{:e}", self.support_threshold)),
            ("trials", self.trials.to_string()),
            ("tau_points", self.tau_points.to_string()),
            ("tau_min_fraction", self.tau_min_fraction.to_string()),
            ("output_dir", self.output_dir.display().to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn parse_num<T: FromStr>(value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("cannot parse {value:?} as a number"))
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {value:?}")),
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::defaults(Experiment::Fig1Small)
    }
}
