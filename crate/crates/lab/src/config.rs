//! Experiment files: one TOML table per experiment plus an optional
//! `[defaults]` table.
//!
//! ```toml
//! [defaults]
//! seed = 7
//! out = "results"
//! restarts = 2
//!
//! [stein_growth]
//! kind = "STEIN"
//! method = "search"
//! n_grid = [4, 8, 16]
//! p_grid = ["inf", 4]
//! ```

use std::path::{Path, PathBuf};

use ncmart::constants::{EstimateKind, InequalityKind};
use ncmart::solver::SolverOptions;
use ncmart::Exponent;
use serde::Deserialize;

use crate::error::{LabError, Result};

/// How a grid cell is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// The explicit Hilbert-matrix witness (no search).
    Witness,
    /// Adversarial search, started from the Hilbert witness and from the
    /// previous cell's witness along the `n` grid.
    Search,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: EstimateKind,
    pub method: Method,
    pub n_grid: Vec<usize>,
    pub p_grid: Vec<Exponent>,
    pub solver: SolverOptions,
    pub seed: u64,
    pub out: PathBuf,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub max_n: Option<usize>,
    pub restarts: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawExponent {
    Number(f64),
    Text(String),
}

impl RawExponent {
    fn parse(&self) -> ncmart::Result<Exponent> {
        match self {
            RawExponent::Number(v) => Exponent::new(*v),
            RawExponent::Text(s) => s.parse(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Defaults {
    seed: Option<u64>,
    out: Option<PathBuf>,
    restarts: Option<usize>,
    max_iterations: Option<usize>,
    tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    kind: String,
    #[serde(default = "default_method")]
    method: Method,
    n_grid: Vec<usize>,
    p_grid: Vec<RawExponent>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    restarts: Option<usize>,
    max_iterations: Option<usize>,
    tolerance: Option<f64>,
}

fn default_method() -> Method {
    Method::Search
}

/// Reads and validates every experiment in `path`. Relative output
/// directories are resolved against the config file's directory.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<Vec<ExperimentConfig>> {
    let text = std::fs::read_to_string(path).map_err(LabError::io(path))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base, overrides)
}

pub fn parse_config(
    text: &str,
    base: &Path,
    overrides: &Overrides,
) -> Result<Vec<ExperimentConfig>> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| LabError::Config(e.to_string()))?;
    let defaults: Defaults = match table.remove("defaults") {
        Some(v) => v
            .try_into()
            .map_err(|e: toml::de::Error| LabError::Config(format!("[defaults]: {e}")))?,
        None => Defaults::default(),
    };
    if table.is_empty() {
        return Err(LabError::Config("no experiment sections".into()));
    }
    table
        .into_iter()
        .map(|(name, value)| {
            let raw: RawExperiment = value
                .try_into()
                .map_err(|e: toml::de::Error| LabError::Config(format!("[{name}]: {e}")))?;
            build(name, raw, &defaults, base, overrides)
        })
        .collect()
}

fn build(
    name: String,
    raw: RawExperiment,
    d: &Defaults,
    base: &Path,
    o: &Overrides,
) -> Result<ExperimentConfig> {
    let label = name.clone();
    let bad = |msg: String| LabError::Config(format!("[{label}]: {msg}"));
    let kind: EstimateKind = raw.kind.parse().map_err(|e| bad(format!("{e}")))?;
    let p_grid = raw
        .p_grid
        .iter()
        .map(RawExponent::parse)
        .collect::<ncmart::Result<Vec<_>>>()
        .map_err(|e| bad(format!("p_grid: {e}")))?;
    let mut n_grid = raw.n_grid;
    if let Some(max_n) = o.max_n {
        n_grid.retain(|&n| n <= max_n);
    }
    let seed = o.seed.or(raw.seed).or(d.seed).unwrap_or(0);
    let defaults = SolverOptions::default();
    let solver = SolverOptions {
        max_iterations: raw
            .max_iterations
            .or(d.max_iterations)
            .unwrap_or(defaults.max_iterations),
        tolerance: raw.tolerance.or(d.tolerance).unwrap_or(defaults.tolerance),
        restarts: o
            .restarts
            .or(raw.restarts)
            .or(d.restarts)
            .unwrap_or(defaults.restarts),
        seed,
    };
    let out = o
        .out
        .clone()
        .or(raw.out)
        .or(d.out.clone())
        .unwrap_or_else(|| "results".into());
    let out = if out.is_relative() && o.out.is_none() {
        base.join(out)
    } else {
        out
    };
    let cfg = ExperimentConfig {
        name,
        kind,
        method: raw.method,
        n_grid,
        p_grid,
        solver,
        seed,
        out,
    };
    validate(&cfg).map_err(bad)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> std::result::Result<(), String> {
    if cfg.name.is_empty()
        || !cfg
            .name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err("experiment names may only use [A-Za-z0-9_-]".into());
    }
    if cfg.n_grid.is_empty() {
        return Err("n_grid is empty".into());
    }
    if cfg.n_grid[0] == 0 || cfg.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err("n_grid must be strictly ascending positive sizes".into());
    }
    if cfg.p_grid.is_empty() {
        return Err("p_grid is empty".into());
    }
    if cfg.solver.tolerance.is_nan()
        || cfg.solver.tolerance <= 0.0
        || cfg.solver.max_iterations == 0
    {
        return Err("solver needs tolerance > 0 and max_iterations >= 1".into());
    }
    for &p in &cfg.p_grid {
        match cfg.kind {
            EstimateKind::Inequality(InequalityKind::BgLower) if !p.at_least_two() => {
                return Err(format!("BG_LOWER is only computed for p >= 2, got {p}"));
            }
            EstimateKind::Inequality(InequalityKind::DoobDual)
                if cfg.method == Method::Witness && p.finite().is_some_and(|v| v < 2.0) =>
            {
                return Err(format!(
                    "the DOOB_DUAL witness evaluates at p/2 and needs p >= 2, got {p}"
                ));
            }
            _ => {}
        }
    }
    if cfg.method == Method::Witness {
        if let EstimateKind::Inequality(k) = cfg.kind {
            if !k.has_hilbert_witness() {
                return Err(format!(
                    "{k} has no explicit witness; use method = \"search\""
                ));
            }
        }
    }
    Ok(())
}
