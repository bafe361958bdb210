//! Scenario runner: sweeps the n-grid of a [`Scenario`], runs every checker
//! and metric on each row and collects a [`ConvergenceReport`].

mod report;
mod scenario;

use std::time::Instant;

use rayon::prelude::*;

pub use report::{round12, format12, ConvergenceReport, LindebergValue, ReportFormat, ReportRow, CSV_COLUMNS, REPORT_SCHEMA};
pub use scenario::{preset, ModeName, Scenario, ShapeConfig, MIN_REPLICATES, PRESETS, REPORT_EPS};

use crate::cf_engine::{coherency_gap, lemma1_gap, StandardNormal};
use crate::conditions::{lyapunov_gf_bound, random_lindeberg, random_lyapunov, ConditionReport};
use crate::error::{Error, Result};
use crate::metrics::{ks, levy, weak2d_law, PairedSample};
use crate::nvm::{TabulatedCdf, VarianceMeanPair};

/// Points of the tabulated limit CDF used for distances to samples.
pub const LIMIT_TABLE_POINTS: usize = 8192;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "RANDSUM_WORKERS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Record wall-clock seconds per row. Off by default so reports are
    /// byte-reproducible.
    pub timings: bool,
}

/// Runs `f` on a pool of `workers` threads (or the global pool).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::config("workers", "must be at least 1")),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::config("workers", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

struct Limit {
    table: TabulatedCdf,
    pair: VarianceMeanPair,
}

fn run_row(s: &Scenario, limit: &Limit, n: u64, opts: &RunOptions) -> ReportRow {
    let start = Instant::now();
    let mut row = ReportRow { n, seed: s.seed, ..ReportRow::default() };
    if let Err(e) = fill_row(s, limit, n, &mut row) {
        row.error = Some(e.to_string());
    }
    if opts.timings {
        row.seconds = start.elapsed().as_secs_f64();
    }
    row
}

fn fill_row(s: &Scenario, limit: &Limit, n: u64, out: &mut ReportRow) -> Result<()> {
    let scheme = s.scheme();
    out.mean_index = Some(scheme.index.law_at(n)?.mean_index());
    let row = scheme.row(n)?;

    let z = row.simulate_sample(s.replicates, s.seed)?;
    out.levy = Some(levy(&z, &limit.table));
    out.ks = Some(ks(&z, &limit.table));
    drop(z);

    let pairs = PairedSample::new(&row.simulate_pairs(s.replicates, s.seed))?;
    out.weak2d = Some(weak2d_law(&pairs, &limit.pair));
    drop(pairs);

    out.coherency_gap = Some(coherency_gap(&row, &StandardNormal, s.report_t).value());
    out.lemma1_gap = Some(lemma1_gap(&row, &StandardNormal, s.report_t).value());
    out.lindeberg = s
        .lindeberg_eps()
        .into_iter()
        .map(|eps| random_lindeberg(&row, eps).map(|value| LindebergValue { eps, value }))
        .collect::<Result<_>>()?;
    out.lyapunov = Some(random_lyapunov(&row));
    out.gf_bound = lyapunov_gf_bound(&row).ok();
    Ok(())
}

/// Runs every row of the n-grid. Configuration errors fail the run; errors
/// within a row are recorded on that row.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<ConvergenceReport> {
    s.validate()?;
    let mixture = s.limit_law()?;
    with_workers(opts.workers, || {
        let limit = Limit {
            table: mixture.tabulate(LIMIT_TABLE_POINTS),
            pair: VarianceMeanPair::of(&mixture),
        };
        let rows = s.n_grid.par_iter().map(|&n| run_row(s, &limit, n, opts)).collect();
        ConvergenceReport { name: s.name.clone(), seed: s.seed, rows }
    })
}

/// One line of the `cf-gap` table.
#[derive(Clone, Debug, PartialEq)]
pub struct CfGapRow {
    pub n: u64,
    pub t: f64,
    pub lemma1_gap: f64,
    pub coherency_gap: f64,
    pub grid_points: usize,
    pub seconds: f64,
}

/// Both gap functionals for every `n` in the grid and `T` in `t_sweep`.
pub fn cf_gap_table(s: &Scenario, opts: &RunOptions) -> Result<Vec<CfGapRow>> {
    s.validate()?;
    let scheme = s.scheme();
    with_workers(opts.workers, || {
        let mut out = Vec::new();
        for &n in &s.n_grid {
            let row = scheme.row(n)?;
            for &t in &s.t_sweep {
                let start = Instant::now();
                let l = lemma1_gap(&row, &StandardNormal, t);
                let c = coherency_gap(&row, &StandardNormal, t);
                out.push(CfGapRow {
                    n,
                    t,
                    lemma1_gap: l.value(),
                    coherency_gap: c.value(),
                    grid_points: l.grid_points,
                    seconds: if opts.timings { start.elapsed().as_secs_f64() } else { 0.0 },
                });
            }
        }
        Ok(out)
    })?
}

pub fn cf_gap_csv(rows: &[CfGapRow]) -> String {
    let mut s = String::from("n,T,lemma1_gap,coherency_gap,grid_points,seconds\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            format12(r.t),
            format12(r.lemma1_gap),
            format12(r.coherency_gap),
            r.grid_points,
            format12(r.seconds)
        ));
    }
    s
}

/// Lindeberg/Lyapunov values for every row of the grid.
pub fn condition_table(s: &Scenario, opts: &RunOptions) -> Result<Vec<ConditionReport>> {
    s.validate()?;
    let scheme = s.scheme();
    with_workers(opts.workers, || {
        s.n_grid
            .iter()
            .map(|&n| ConditionReport::evaluate(&scheme.row(n)?, &s.eps_sweep))
            .collect::<Result<Vec<_>>>()
    })?
}

pub fn condition_csv(reports: &[ConditionReport]) -> String {
    let mut s = String::from("n,eps,lindeberg,lyapunov,gf_bound,method\n");
    for r in reports {
        for &(eps, value) in &r.lindeberg {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                format12(eps),
                format12(value),
                format12(r.lyapunov),
                r.gf_bound.map(format12).unwrap_or_default(),
                r.method.as_str()
            ));
        }
    }
    s
}
