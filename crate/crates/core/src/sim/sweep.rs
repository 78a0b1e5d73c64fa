use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::engine::{run, RunSummary, StepRecord};
use super::stats::{aggregate, Aggregate};
use super::{Kpi, Scenario, SimError};
use crate::ahp::Slice;
use crate::ldpc::CalibrationSet;
use crate::seeds::derive_seed;
use crate::selection::SelectorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVar {
    Speed,
    Users,
}

impl SweepVar {
    pub fn key(self) -> &'static str {
        match self {
            SweepVar::Speed => "speed",
            SweepVar::Users => "users",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepVar::Speed => vec![2.0, 4.0, 6.0, 8.0, 10.0],
            SweepVar::Users => vec![20.0, 40.0, 60.0, 80.0, 100.0],
        }
    }

    /// Copy of `base` at one operating point.
    pub fn apply(self, base: &Scenario, value: f64) -> Scenario {
        let mut sc = base.clone();
        match self {
            SweepVar::Speed => sc.engine.speed_mps = value,
            SweepVar::Users => sc.engine.n_ue = value.round() as usize,
        }
        sc
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SweepVar {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "speed" => Ok(SweepVar::Speed),
            "users" | "ues" => Ok(SweepVar::Users),
            other => Err(format!("unknown sweep variable `{other}` (speed or users)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub var: SweepVar,
    pub values: Vec<f64>,
    pub selectors: Vec<SelectorKind>,
    pub runs: usize,
    pub seed: u64,
}

/// Identifies one replication inside a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub selector: SelectorKind,
    pub value: f64,
    pub run: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub selector: SelectorKind,
    pub slice: Slice,
    pub var: SweepVar,
    pub value: f64,
    pub kpis: Vec<(Kpi, Aggregate)>,
    pub runs: Vec<RunSummary>,
}

impl SweepResult {
    pub fn kpi(&self, kpi: Kpi) -> Aggregate {
        self.kpis.iter().find(|(k, _)| *k == kpi).map(|(_, a)| *a).expect("all KPIs aggregated")
    }
}

/// Seed of replication `run`. Every selector and operating point sees the
/// same placement, shadowing and mobility for a given run index.
pub fn run_seed(master: u64, run: usize) -> u64 {
    derive_seed(master, &[run as u64])
}

pub type LogSink<'a> = &'a (dyn Fn(&Job, &[StepRecord]) -> Result<(), String> + Sync);

/// Runs every (selector, value, run) job and aggregates per operating point.
/// Results are ordered selector-major, then by sweep value.
pub fn run_sweep(
    base: &Scenario,
    plan: &SweepPlan,
    curves: &CalibrationSet,
    log_sink: Option<LogSink<'_>>,
) -> Result<Vec<SweepResult>, SimError> {
    if plan.runs < 2 {
        return Err(SimError::InsufficientRuns(plan.runs));
    }
    if plan.values.is_empty() || plan.selectors.is_empty() {
        return Err(SimError::Config("sweep needs at least one value and one selector".into()));
    }
    let jobs: Vec<Job> = plan
        .selectors
        .iter()
        .flat_map(|&selector| {
            plan.values
                .iter()
                .flat_map(move |&value| (0..plan.runs).map(move |run| Job { selector, value, run }))
        })
        .collect();
    let exec = |job: &Job| -> Result<RunSummary, SimError> {
        let mut sc = plan.var.apply(base, job.value);
        sc.selector = job.selector;
        let seed = run_seed(plan.seed, job.run);
        match log_sink {
            Some(sink) => {
                let mut log = Vec::new();
                let s = run(&sc, curves, seed, Some(&mut log))?;
                sink(job, &log).map_err(SimError::Config)?;
                Ok(s)
            }
            None => run(&sc, curves, seed, None),
        }
    };
    let summaries: Vec<RunSummary> = if base.engine.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(base.engine.workers)
            .build()
            .map_err(|e| SimError::Config(format!("worker pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(exec).collect::<Result<_, _>>())?
    } else {
        jobs.par_iter().map(exec).collect::<Result<_, _>>()?
    };
    summaries
        .chunks(plan.runs)
        .zip(jobs.chunks(plan.runs))
        .map(|(runs, js)| {
            let kpis = Kpi::ALL
                .iter()
                .map(|&k| {
                    let values: Vec<f64> = runs.iter().map(|r| r.kpi(k)).collect();
                    aggregate(&values).map(|a| (k, a))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SweepResult {
                selector: js[0].selector,
                slice: base.slice,
                var: plan.var,
                value: js[0].value,
                kpis,
                runs: runs.to_vec(),
            })
        })
        .collect()
}
