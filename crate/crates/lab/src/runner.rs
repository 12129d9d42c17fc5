//! Grid sweeps. Each `p` of an experiment is one chain over the ascending
//! `n` grid (the witness at one size seeds the search at the next); chains
//! run on a worker pool and a single writer streams rows in grid order.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ncmart::constants::{
    adversarial_search_seeded, hilbert_witness, ConstantEstimate, EstimateKind, RatioInput, Witness,
};
use ncmart::par::Execution;
use ncmart::solver::split_seed;
use ncmart::triproj::{hilbert_matrix, triangular_ratio, triproj_norm_estimate_seeded};
use ncmart::{ComplexMatrix, Exponent};

use crate::config::{ExperimentConfig, Method};
use crate::error::{LabError, Result};
use crate::report::{emit_report, fit_rows, CsvSink, FitSummary, ReportFormat, ResultRow};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
    /// Record wall-clock seconds. Off by default so reruns are byte-identical.
    pub timing: bool,
}

struct Outcome {
    index: usize,
    n: usize,
    p: Exponent,
    seconds: f64,
    estimate: std::result::Result<ConstantEstimate, String>,
}

/// Seed of cell `(p_index, n_index)`: a pure function of the experiment
/// seed and the cell's grid position.
pub fn cell_seed(cfg: &ExperimentConfig, p_index: usize, n_index: usize) -> u64 {
    split_seed(cfg.seed, (p_index * cfg.n_grid.len() + n_index) as u64)
}

fn triproj_witness(n: usize, p: Exponent) -> ncmart::Result<ConstantEstimate> {
    let h = hilbert_matrix(n)?;
    Ok(ConstantEstimate {
        kind: EstimateKind::Triproj,
        n,
        p,
        lower_bound: triangular_ratio(&h, p)?,
        witness: Witness::Matrix(h),
        iterations: 0,
        seed: 0,
        converged: true,
        rel_gap: 0.0,
    })
}

fn evaluate_cell(
    cfg: &ExperimentConfig,
    n: usize,
    p: Exponent,
    seed: u64,
    prev: Option<&Witness>,
) -> ncmart::Result<ConstantEstimate> {
    let opts = cfg.solver.with_seed(seed);
    match (cfg.method, cfg.kind) {
        (Method::Witness, EstimateKind::Triproj) => triproj_witness(n, p),
        (Method::Witness, EstimateKind::Inequality(k)) => hilbert_witness(k, n, p),
        (Method::Search, EstimateKind::Triproj) => {
            let seeds: Vec<ComplexMatrix> = match prev {
                Some(Witness::Matrix(x)) => vec![x.clone()],
                _ => Vec::new(),
            };
            triproj_norm_estimate_seeded(n, p, &opts, &seeds, Execution::Sequential)
        }
        (Method::Search, EstimateKind::Inequality(k)) => {
            let seeds: Vec<RatioInput> = match prev {
                Some(Witness::Ratio(r)) => vec![r.clone()],
                _ => Vec::new(),
            };
            adversarial_search_seeded(k, n, p, &opts, &seeds, Execution::Sequential)
        }
    }
}

fn run_chain(cfg: &ExperimentConfig, p_index: usize, timing: bool, mut emit: impl FnMut(Outcome)) {
    let p = cfg.p_grid[p_index];
    let mut prev: Option<Witness> = None;
    for (n_index, &n) in cfg.n_grid.iter().enumerate() {
        let start = Instant::now();
        let estimate = evaluate_cell(cfg, n, p, cell_seed(cfg, p_index, n_index), prev.as_ref());
        let seconds = if timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        if let Ok(e) = &estimate {
            prev = Some(e.witness.clone());
        }
        emit(Outcome {
            index: p_index * cfg.n_grid.len() + n_index,
            n,
            p,
            seconds,
            estimate: estimate.map_err(|e| e.to_string()),
        });
    }
}

/// Sole owner of the CSV and witness files of one experiment. Outcomes may
/// arrive in any order; rows are written in grid order.
struct Writer<'a> {
    cfg: &'a ExperimentConfig,
    sink: CsvSink<File>,
    csv_path: PathBuf,
    pending: BTreeMap<usize, Outcome>,
    rows: Vec<ResultRow>,
    unconverged: usize,
    error: Option<LabError>,
}

impl Writer<'_> {
    fn accept(&mut self, o: Outcome) {
        self.pending.insert(o.index, o);
        while let Some(o) = self.pending.remove(&self.rows.len()) {
            let row = self.write(o);
            self.rows.push(row);
        }
    }

    fn write(&mut self, o: Outcome) -> ResultRow {
        let cfg = self.cfg;
        let mut row = ResultRow {
            kind: cfg.kind,
            n: o.n,
            p: o.p,
            bound: f64::NAN,
            seconds: o.seconds,
            iterations: 0,
            witness_ref: String::new(),
        };
        match o.estimate {
            Ok(est) => {
                let rel = format!(
                    "witnesses/{}/{}_n{}_p{}.json",
                    cfg.name, cfg.kind, o.n, est.p
                );
                let path = cfg.out.join(&rel);
                if let Err(e) = write_witness(&path, &est) {
                    self.error.get_or_insert(e);
                }
                self.unconverged += usize::from(!est.converged);
                row.p = est.p;
                row.bound = est.lower_bound;
                row.iterations = est.iterations;
                row.witness_ref = rel;
            }
            Err(e) => eprintln!("warning: {} n={} p={}: {e}", cfg.name, o.n, o.p),
        }
        if let Err(e) = self.sink.push(&row) {
            self.error
                .get_or_insert(LabError::results(&self.csv_path, e));
        }
        row
    }
}

fn write_witness(path: &Path, est: &ConstantEstimate) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(LabError::io(dir))?;
    }
    let mut text = serde_json::to_string_pretty(est).map_err(|e| LabError::Input(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(LabError::io(path))
}

pub fn csv_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.join(format!("{}.csv", cfg.name))
}

/// Evaluates every cell of `cfg`, streaming `<out>/<name>.csv` and one
/// witness file per cell. Failed cells become rows with a NaN bound; they
/// never abort the sweep.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    std::fs::create_dir_all(&cfg.out).map_err(LabError::io(&cfg.out))?;
    let csv_path = csv_path(cfg);
    let file = File::create(&csv_path).map_err(LabError::io(&csv_path))?;
    let sink = CsvSink::new(file).map_err(|e| LabError::results(&csv_path, e))?;
    let mut writer = Writer {
        cfg,
        sink,
        csv_path,
        pending: BTreeMap::new(),
        rows: Vec::new(),
        unconverged: 0,
        error: None,
    };
    dispatch(cfg, opts, |o| writer.accept(o))?;
    if writer.unconverged > 0 {
        eprintln!(
            "note: {}: {} of {} cells stopped on the iteration budget (flagged in their witness files)",
            cfg.name,
            writer.unconverged,
            writer.rows.len()
        );
    }
    match writer.error {
        Some(e) => Err(e),
        None => Ok(writer.rows),
    }
}

#[cfg(feature = "parallel")]
fn dispatch(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    mut accept: impl FnMut(Outcome),
) -> Result<()> {
    use rayon::prelude::*;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(0))
        .build()
        .map_err(|e| LabError::Input(e.to_string()))?;
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::scope(|s| {
        s.spawn(|| {
            pool.install(|| {
                (0..cfg.p_grid.len())
                    .into_par_iter()
                    .for_each_with(tx, |tx, pi| {
                        run_chain(cfg, pi, opts.timing, |o| {
                            let _ = tx.send(o);
                        })
                    })
            })
        });
        for o in rx {
            accept(o);
        }
    });
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn dispatch(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    mut accept: impl FnMut(Outcome),
) -> Result<()> {
    for pi in 0..cfg.p_grid.len() {
        run_chain(cfg, pi, opts.timing, &mut accept);
    }
    Ok(())
}

/// Runs `cfg`, then writes the JSON report and plot files with the
/// `LOG_POWER` fits of every series long enough to fit.
pub fn run_and_report(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<(Vec<ResultRow>, Vec<FitSummary>)> {
    let rows = run_experiment(cfg, opts)?;
    let fits = fit_rows(&rows, ncmart::constants::FitModel::LogPower);
    emit_report(&rows, &fits, ReportFormat::Json, &cfg.out, &cfg.name)?;
    if rows.iter().any(|r| r.bound.is_finite()) {
        emit_report(&rows, &fits, ReportFormat::PlotData, &cfg.out, &cfg.name)?;
    }
    Ok((rows, fits))
}
