use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use randsum_core::harness::{
    cf_gap_csv, cf_gap_table, condition_csv, condition_table, preset, run_scenario, ReportFormat, RunOptions, Scenario, LIMIT_TABLE_POINTS,
    WORKERS_ENV,
};
use randsum_core::metrics::{levy, EmpiricalDistribution};
use randsum_core::nvm::{MixtureConfig, NVMixture};
use randsum_core::Error;

/// Limit theorems for randomly indexed sums: convergence experiments,
/// characteristic-function gaps, Lindeberg/Lyapunov checks and Lévy distances.
#[derive(Parser)]
#[command(name = "randsum", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario over its n-grid and write a convergence report.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// csv or json; defaults to json for a .json output path, else csv.
        #[arg(long)]
        format: Option<String>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Record wall-clock seconds per row (reports are then not byte-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Print a named scenario as JSON.
    Preset { name: String },
    /// Tabulate the lemma1 and coherency gaps over the n-grid and T-sweep.
    CfGap {
        scenario: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        timings: bool,
    },
    /// Tabulate random Lindeberg and Lyapunov values over the n-grid and ε-sweep.
    CheckConditions {
        scenario: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Lévy distance between a sample and another sample or a mixture law.
    Levy {
        /// Single-column CSV of draws.
        #[arg(long)]
        a: PathBuf,
        /// Single-column CSV of draws, or `mixture:<JSON config or path>`.
        #[arg(long)]
        b: String,
    },
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

/// Input files that cannot be read are the caller's mistake.
fn input<T>(r: randsum_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        Error::Io { .. } => Failure::Validation(e.to_string()),
        other => other.into(),
    })
}

fn workers(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    let chosen = match std::env::var(WORKERS_ENV) {
        Ok(v) if !v.trim().is_empty() => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Failure::Validation(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?,
        ),
        _ => flag,
    };
    if chosen == Some(0) {
        return Err(Failure::Validation("worker count must be at least 1".into()));
    }
    Ok(chosen)
}

fn load_mixture(source: &str) -> Result<NVMixture, Failure> {
    let text = if source.trim_start().starts_with('{') {
        source.to_string()
    } else {
        std::fs::read_to_string(source).map_err(|e| Failure::Validation(format!("cannot read mixture config {source}: {e}")))?
    };
    let config: MixtureConfig =
        serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("invalid mixture config: {e}")))?;
    Ok(NVMixture::from_config(&config)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scenario, out, format, seed, workers: w, timings } => {
            let mut s = input(Scenario::load(&scenario))?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let format = match format {
                Some(f) => f.parse::<ReportFormat>()?,
                None if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => ReportFormat::Json,
                None => ReportFormat::Csv,
            };
            let opts = RunOptions { workers: workers(w)?, timings };
            let report = run_scenario(&s, &opts)?;
            report.emit(format, &out).map_err(|e| Failure::Runtime(e.to_string()))?;
            for row in report.rows.iter().filter(|r| r.error.is_some()) {
                eprintln!("row n={}: {}", row.n, row.error.as_deref().unwrap_or_default());
            }
        }
        Command::Preset { name } => {
            println!("{}", preset(&name)?.to_json());
        }
        Command::CfGap { scenario, workers: w, timings } => {
            let s = input(Scenario::load(&scenario))?;
            let rows = cf_gap_table(&s, &RunOptions { workers: workers(w)?, timings })?;
            print!("{}", cf_gap_csv(&rows));
        }
        Command::CheckConditions { scenario, workers: w } => {
            let s = input(Scenario::load(&scenario))?;
            let reports = condition_table(&s, &RunOptions { workers: workers(w)?, timings: false })?;
            print!("{}", condition_csv(&reports));
        }
        Command::Levy { a, b } => {
            let sample = input(EmpiricalDistribution::read_csv(&a))?;
            let d = match b.strip_prefix("mixture:") {
                Some(source) => levy(&sample, &load_mixture(source)?.tabulate(LIMIT_TABLE_POINTS)),
                None => levy(&sample, &input(EmpiricalDistribution::read_csv(Path::new(&b)))?),
            };
            println!("{d}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
