use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ncmart::constants::{hilbert_witness, FitModel, InequalityKind};
use ncmart::Exponent;
use ncmart_lab::{
    fit_rows, load_config, run_and_report, verify_results, LabError, Overrides, RunOptions,
};

/// Best-constant experiments for matrix martingale inequalities.
#[derive(Debug, Parser)]
#[command(name = "ncmart", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every experiment in a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides every experiment's `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Drop grid sizes above this.
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Record wall-clock seconds (makes the CSV run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Replay every witness referenced by a results CSV.
    Verify { results: PathBuf },
    /// Growth fits of the series in a results CSV.
    Fit {
        results: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::Log)]
        model: ModelArg,
    },
    /// Print the explicit Hilbert-matrix witness bound.
    Witness {
        kind: InequalityKind,
        n: usize,
        p: Exponent,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Log,
    P,
}

enum Outcome {
    Done,
    Mismatch,
}

fn execute(cli: Cli) -> Result<Outcome, LabError> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            jobs,
            max_n,
            restarts,
            timing,
        } => {
            let overrides = Overrides {
                seed,
                out,
                max_n,
                restarts,
            };
            let opts = RunOptions { jobs, timing };
            for cfg in load_config(&config, &overrides)? {
                let (rows, fits) = run_and_report(&cfg, &opts)?;
                println!(
                    "{}: {} rows -> {}",
                    cfg.name,
                    rows.len(),
                    cfg.out.join(format!("{}.csv", cfg.name)).display()
                );
                for f in &fits {
                    println!("{}", f.summary_line());
                }
            }
            Ok(Outcome::Done)
        }
        Command::Verify { results } => {
            let report = verify_results(&results)?;
            for m in &report.mismatches {
                println!("MISMATCH row {}: {}", m.row, m.reason);
            }
            println!(
                "verified {} rows, {} mismatches, max relative error {:e}",
                report.checked,
                report.mismatches.len(),
                report.max_rel_error
            );
            Ok(if report.ok() {
                Outcome::Done
            } else {
                Outcome::Mismatch
            })
        }
        Command::Fit { results, model } => {
            let model = match model {
                ModelArg::Log => FitModel::LogPower,
                ModelArg::P => FitModel::PPower,
            };
            let rows = ncmart_lab::report::read_csv(&results)?;
            let fits = fit_rows(&rows, model);
            if fits.is_empty() {
                return Err(LabError::Input(
                    "no series with at least 4 positive values".into(),
                ));
            }
            for f in &fits {
                println!("{}", f.summary_line());
            }
            Ok(Outcome::Done)
        }
        Command::Witness { kind, n, p } => {
            let est = hilbert_witness(kind, n, p)?;
            println!(
                "{} n={} p={} bound={}",
                est.kind,
                est.n,
                est.p,
                ncmart_lab::report::format_number(est.lower_bound)
            );
            Ok(Outcome::Done)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Mismatch) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
