//! Monte Carlo harness for the query-tree size bounds.
//!
//! Each experiment runs independent trials (trial `i` draws only from
//! `child_seed(base_seed, i)`), folds their [`Tally`]s in trial order and
//! derives statistics and threshold checks from the folded tally. Tallies
//! merge exactly, so a report is a pure function of its config no matter how
//! trials are split across threads or runs.
//!
//! Tail bounds of order `1/n²` cannot be observed directly at desk scale;
//! they are checked as zero exceedances of the explicit thresholds, plus
//! distributional diagnostics.

pub mod config;
pub mod report;
mod runners;

use std::ops::Range;

use rayon::prelude::*;

pub use config::{ExperimentConfig, ExperimentKind, ExposureSource, ResolvedConfig, TreeMode};
pub use report::{Cell, Check, Histogram, Report, Tally};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed::child_seed;

/// Child stream reserved for building the experiment's graph.
const GRAPH_STREAM: u64 = u64::MAX;

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Everything a trial needs besides its index.
pub(crate) struct Prepared {
    pub cfg: ResolvedConfig,
    /// The shared graph; `None` for `tmax`, which builds one graph per cell.
    pub graph: Option<Graph>,
}

pub(crate) fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    if cfg.experiment == ExperimentKind::Tmax {
        return Ok(Prepared { cfg: cfg.resolve(None)?, graph: None });
    }
    cfg.graph.check().map_err(|e| Error::Config(e.to_string()))?;
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let graph = cfg.graph.build(child_seed(cfg.base_seed.0, GRAPH_STREAM))?;
    let resolved = cfg.resolve(Some(&graph))?;
    if graph.n() == 0 {
        return Err(Error::Config("the experiment graph has no vertices".into()));
    }
    Ok(Prepared { cfg: resolved, graph: Some(graph) })
}

fn run_range(p: &Prepared, trials: Range<u64>) -> Result<Tally> {
    let parts: Vec<Tally> = match p.cfg.experiment {
        ExperimentKind::Tmax => {
            let cells: Vec<(usize, u64)> = p
                .cfg
                .n_list
                .iter()
                .flat_map(|&n| trials.clone().map(move |s| (n, s)))
                .collect();
            cells.into_par_iter().map(|(n, s)| runners::tmax_cell(p, n, s)).collect::<Result<_>>()?
        }
        _ => trials.into_par_iter().map(|i| runners::trial(p, i)).collect::<Result<_>>()?,
    };
    let mut tally = Tally::default();
    for part in parts {
        tally.absorb(part)?;
    }
    tally.cells.sort_by_key(|c| (c.n, c.trial));
    Ok(tally)
}

/// Runs every trial of `cfg` and returns the finished report.
pub fn run(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Report> {
    run_trials(cfg, 0..cfg.trials as u64, threads)
}

/// Runs only the trials in `trials`. Reports of disjoint ranges can be
/// combined with [`Report::merge`].
pub fn run_trials(cfg: &ExperimentConfig, trials: Range<u64>, threads: Option<usize>) -> Result<Report> {
    with_threads(threads, || {
        let prepared = prepare(cfg)?;
        let tally = run_range(&prepared, trials)?;
        Ok(finalize(&prepared.cfg, tally))
    })?
}

/// Derives statistics and checks from a tally.
pub fn finalize(cfg: &ResolvedConfig, tally: Tally) -> Report {
    let mut report = Report {
        experiment: cfg.experiment,
        config: cfg.clone(),
        tally,
        derived: Default::default(),
        checks: Vec::new(),
        passed: false,
        notes: Vec::new(),
    };
    runners::derive(&mut report);
    report.passed = report.checks.iter().all(|c| c.passed);
    report
}
