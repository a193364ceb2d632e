//! Single runs, replicated runs and parameter sweeps.
//!
//! Every job owns its world and random stream. Replica seeds are derived from
//! `(base seed, cell index, replica index)` only, so results do not depend on
//! how many workers execute the jobs or in which order they finish.

use dilemma_core::dynamics::World;
use dilemma_core::learning::{ActionKind, ActionSet};
use dilemma_core::metrics::{tail_len, ActionTable, MetricsRecord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::SimConfig;
use crate::error::{ConfigError, SweepError};
use crate::seeds::derive_seed;

pub type SimRng = ChaCha8Rng;

/// Tail-averaged observables of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub coop_fraction: f64,
    pub action_fractions: ActionTable<f64>,
    /// Mean over the tail window of the defined correlation values; `None`
    /// when undefined throughout the window or outside the action set.
    pub correlations: ActionTable<Option<f64>>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub config: SimConfig,
    pub series: Vec<MetricsRecord>,
    pub summary: RunSummary,
}

pub fn build_world(config: &SimConfig) -> Result<World<SimRng>, ConfigError> {
    let rules = config.validate()?;
    let rng = SimRng::seed_from_u64(config.seed);
    Ok(World::populate(
        config.side,
        config.rho,
        config.init_mode,
        rules,
        rng,
    )?)
}

/// Runs `config.n_mcs` Monte Carlo steps and records metrics after each.
pub fn run_single(config: &SimConfig) -> Result<RunResult, ConfigError> {
    run_observed(config, |_| {})
}

/// Like [`run_single`], calling `observe` on the initial world and after
/// every Monte Carlo step.
pub fn run_observed<F>(config: &SimConfig, mut observe: F) -> Result<RunResult, ConfigError>
where
    F: FnMut(&World<SimRng>),
{
    let mut world = build_world(config)?;
    observe(&world);
    let mut series = Vec::with_capacity(config.n_mcs as usize);
    for _ in 0..config.n_mcs {
        world.mcs();
        series.push(MetricsRecord::observe(&world));
        observe(&world);
    }
    let summary = summarize(&series, config.tail_fraction, config.action_set);
    Ok(RunResult {
        config: config.clone(),
        series,
        summary,
    })
}

/// Averages the last `ceil(tail_fraction * len)` records.
pub fn summarize(series: &[MetricsRecord], tail_fraction: f64, set: ActionSet) -> RunSummary {
    assert!(!series.is_empty(), "cannot summarize an empty series");
    let tail = &series[series.len() - tail_len(series.len(), tail_fraction)..];
    let k = tail.len() as f64;
    let coop_fraction = tail.iter().map(|r| r.coop_fraction).sum::<f64>() / k;
    let mut action_fractions = ActionTable::<f64>::default();
    let mut correlations = ActionTable::<Option<f64>>::default();
    for a in ActionKind::ALL {
        action_fractions[a] = tail.iter().map(|r| r.action_fractions[a]).sum::<f64>() / k;
        if set.contains(a) {
            let defined: Vec<f64> = tail.iter().filter_map(|r| r.correlations[a]).collect();
            if !defined.is_empty() {
                correlations[a] = Some(defined.iter().sum::<f64>() / defined.len() as f64);
            }
        }
    }
    RunSummary {
        coop_fraction,
        action_fractions,
        correlations,
    }
}

/// Mean and standard error over replicas.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaStats {
    pub coop_mean: f64,
    /// Sample standard deviation over `sqrt(replicas)`; 0 for one replica.
    pub coop_stderr: f64,
    pub action_means: ActionTable<f64>,
    pub correlation_means: ActionTable<Option<f64>>,
    pub summaries: Vec<RunSummary>,
}

impl ReplicaStats {
    pub fn from_summaries(summaries: Vec<RunSummary>) -> Self {
        assert!(!summaries.is_empty(), "no replicas to aggregate");
        let values: Vec<f64> = summaries.iter().map(|s| s.coop_fraction).collect();
        let (coop_mean, coop_stderr) = mean_stderr(&values);
        let mut action_means = ActionTable::<f64>::default();
        let mut correlation_means = ActionTable::<Option<f64>>::default();
        for a in ActionKind::ALL {
            let v: Vec<f64> = summaries.iter().map(|s| s.action_fractions[a]).collect();
            action_means[a] = mean_stderr(&v).0;
            let c: Vec<f64> = summaries.iter().filter_map(|s| s.correlations[a]).collect();
            if !c.is_empty() {
                correlation_means[a] = Some(mean_stderr(&c).0);
            }
        }
        ReplicaStats {
            coop_mean,
            coop_stderr,
            action_means,
            correlation_means,
            summaries,
        }
    }

    pub fn replicas(&self) -> usize {
        self.summaries.len()
    }
}

pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One unit of work: a cell of a sweep and a replica index.
#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub cell: usize,
    pub replica: usize,
    /// Fully resolved, including the derived seed.
    pub config: SimConfig,
}

fn replica_jobs(cell: usize, config: &SimConfig) -> impl Iterator<Item = Job> + '_ {
    (0..config.replicas).map(move |replica| Job {
        cell,
        replica,
        config: config.with_seed(derive_seed(config.seed, cell as u64, replica as u64)),
    })
}

/// Runs jobs on a pool of `workers` threads (0 lets rayon decide). Output
/// order follows input order.
pub fn run_jobs(jobs: &[Job], workers: usize) -> Result<Vec<RunSummary>, ConfigError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(|| {
        jobs.par_iter()
            .map(|job| run_single(&job.config).map(|r| r.summary))
            .collect()
    })
}

/// `config.replicas` independent runs with derived seeds.
pub fn run_replicated(config: &SimConfig, workers: usize) -> Result<ReplicaStats, ConfigError> {
    config.validate()?;
    let jobs: Vec<Job> = replica_jobs(0, config).collect();
    Ok(ReplicaStats::from_summaries(run_jobs(&jobs, workers)?))
}

/// Cartesian grid over any of `b`, `rho` and `p_d`. An empty axis keeps the
/// base value.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: SimConfig,
    pub b: Vec<f64>,
    pub rho: Vec<f64>,
    pub p_d: Vec<f64>,
}

impl SweepSpec {
    pub fn new(base: SimConfig) -> Self {
        SweepSpec {
            base,
            b: Vec::new(),
            rho: Vec::new(),
            p_d: Vec::new(),
        }
    }

    /// Cell configurations, `b` slowest and `p_d` fastest.
    pub fn cells(&self) -> Vec<SimConfig> {
        let axis = |v: &[f64], base: f64| if v.is_empty() { vec![base] } else { v.to_vec() };
        let mut out = Vec::new();
        for &b in &axis(&self.b, self.base.b) {
            for &rho in &axis(&self.rho, self.base.rho) {
                for &p_d in &axis(&self.p_d, self.base.p_d) {
                    out.push(SimConfig {
                        b,
                        rho,
                        p_d,
                        ..self.base.clone()
                    });
                }
            }
        }
        out
    }

    /// All jobs of the sweep, cell by cell.
    pub fn jobs(&self) -> Vec<Job> {
        self.cells()
            .iter()
            .enumerate()
            .flat_map(|(i, c)| replica_jobs(i, c).collect::<Vec<_>>())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub config: SimConfig,
    pub stats: ReplicaStats,
}

/// Runs every cell of `spec`. All cells are validated before any work
/// starts; rows come back in cell order regardless of `workers`.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<Vec<SweepRow>, SweepError> {
    if spec.b.is_empty() && spec.rho.is_empty() && spec.p_d.is_empty() {
        return Err(SweepError::NoAxes);
    }
    let cells = spec.cells();
    for (cell, config) in cells.iter().enumerate() {
        config.validate().map_err(|source| SweepError::Cell {
            cell,
            config: config.to_string(),
            source,
        })?;
    }
    let jobs = spec.jobs();
    let summaries = run_jobs(&jobs, workers).map_err(|source| SweepError::Cell {
        cell: 0,
        config: spec.base.to_string(),
        source,
    })?;
    let mut per_cell: Vec<Vec<RunSummary>> = vec![Vec::new(); cells.len()];
    for (job, summary) in jobs.iter().zip(summaries) {
        per_cell[job.cell].push(summary);
    }
    Ok(cells
        .into_iter()
        .zip(per_cell)
        .map(|(config, s)| SweepRow {
            config,
            stats: ReplicaStats::from_summaries(s),
        })
        .collect())
}
