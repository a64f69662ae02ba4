use std::cmp::Ordering;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use super::csv_io::{write_aggregate, write_episodes, write_sweep, write_steps, SweepRow};
use super::{mean_stderr, run_single, Curves, ExperimentConfig, RunLog, SweepGrid};
use crate::envs::make_env;
use crate::{Error, Result};

pub const METRIC_CUMULATIVE: &str = "cumulative_reward";
pub const METRIC_FINAL_LENGTH: &str = "final_episode_length";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
}

impl Stat {
    fn of(values: &[f64]) -> Self {
        let (mean, stderr) = mean_stderr(values);
        Self { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedRun {
    pub run: usize,
    pub error: String,
}

/// Headline numbers of an experiment, over its successful runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub env: String,
    pub agent: String,
    pub runs: usize,
    pub failures: usize,
    pub failed_runs: Vec<FailedRun>,
    /// `cumulative_reward` for continuing tasks, `final_episode_length` for episodic ones.
    pub metric: &'static str,
    pub value: Stat,
    pub episodes: Stat,
    pub goals: Stat,
    pub cumulative_reward: Stat,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub logs: Vec<RunLog>,
    pub curves: Curves,
    pub summary: Summary,
}

impl ExperimentResult {
    pub fn successful(&self) -> impl Iterator<Item = &RunLog> {
        self.logs.iter().filter(|r| !r.failed())
    }

    pub fn all_failed(&self) -> bool {
        self.summary.failures == self.summary.runs
    }

    /// Per-run values of `f` over successful runs.
    pub fn per_run(&self, f: impl Fn(&RunLog) -> f64) -> Vec<f64> {
        self.successful().map(f).collect()
    }
}

/// Mean episode length over the final tenth (at least one) of the completed
/// episodes; a run that never finishes an episode scores its step count.
pub fn final_episode_length(log: &RunLog) -> f64 {
    let eps = log.episodes();
    if eps.is_empty() {
        return log.steps.len() as f64;
    }
    let k = eps.len().div_ceil(10);
    eps[eps.len() - k..].iter().map(|e| e.length as f64).sum::<f64>() / k as f64
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every run of `cfg` (in parallel) and aggregates them.
pub fn run_experiment(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentResult> {
    cfg.validate()?;
    if workers == Some(0) {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let episodic = make_env(&cfg.env.name, &cfg.env.params, 0)?.spec().episodic;
    let logs: Vec<RunLog> =
        with_workers(workers, || (0..cfg.runs).into_par_iter().map(|i| run_single(cfg, i)).collect::<Result<_>>())??;
    Ok(summarize(cfg.clone(), logs, episodic))
}

fn summarize(config: ExperimentConfig, logs: Vec<RunLog>, episodic: bool) -> ExperimentResult {
    let curves = Curves::from_runs(&logs);
    let ok: Vec<&RunLog> = logs.iter().filter(|r| !r.failed()).collect();
    let per = |f: &dyn Fn(&RunLog) -> f64| Stat::of(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
    let cumulative_reward = per(&RunLog::total_reward);
    let (metric, value) = if episodic {
        (METRIC_FINAL_LENGTH, per(&final_episode_length))
    } else {
        (METRIC_CUMULATIVE, cumulative_reward.clone())
    };
    let failed_runs: Vec<FailedRun> = logs
        .iter()
        .filter_map(|r| r.failure.as_ref().map(|e| FailedRun { run: r.run, error: e.clone() }))
        .collect();
    let summary = Summary {
        env: config.env.name.clone(),
        agent: config.agent.name.clone(),
        runs: logs.len(),
        failures: failed_runs.len(),
        failed_runs,
        metric,
        value,
        episodes: per(&|r| r.num_episodes() as f64),
        goals: per(&|r| r.num_goals() as f64),
        cumulative_reward,
    };
    ExperimentResult { config, logs, curves, summary }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Writes per-step and per-episode logs of successful runs, the aggregate
/// curves, `summary.json` and the resolved `config.json` into `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let ok: Vec<RunLog> = result.successful().cloned().collect();
    write_steps(create(dir, "steps.csv")?, &ok)?;
    write_episodes(create(dir, "episodes.csv")?, &ok)?;
    let c = &result.curves;
    write_aggregate(create(dir, "curve_episodes.csv")?, &c.episodes)?;
    write_aggregate(create(dir, "curve_episodes_ma10.csv")?, &c.episodes_smoothed)?;
    write_aggregate(create(dir, "curve_reward_rate.csv")?, &c.reward_rate)?;
    write_aggregate(create(dir, "curve_cumulative.csv")?, &c.cumulative)?;
    if let Some(opt) = &c.optimal {
        write_aggregate(create(dir, "curve_optimal.csv")?, opt)?;
    }
    serde_json::to_writer_pretty(create(dir, "summary.json")?, &result.summary)?;
    serde_json::to_writer_pretty(create(dir, "config.json")?, &result.config)?;
    Ok(())
}

/// Total order on grid values: numbers numerically, then by JSON text.
fn cmp_values(a: &Value, b: &Value) -> Ordering {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.to_string().cmp(&b.to_string()),
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub names: Vec<String>,
    /// Sorted lexicographically by parameter values.
    pub rows: Vec<SweepRow>,
    pub cells: Vec<ExperimentResult>,
}

/// Runs a full experiment per grid cell.
pub fn run_sweep(base: &ExperimentConfig, grid: &SweepGrid, workers: Option<usize>) -> Result<SweepResult> {
    let mut cells = grid.cells();
    cells.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| cmp_values(x, y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal));
    let configs = cells.iter().map(|c| grid.apply(base, c)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(cells.len());
    let mut results = Vec::with_capacity(cells.len());
    for (values, cfg) in cells.into_iter().zip(&configs) {
        let r = run_experiment(cfg, workers)?;
        let s = &r.summary;
        rows.push(SweepRow { values, metric: s.metric, mean: s.value.mean, stderr: s.value.stderr, failures: s.failures });
        results.push(r);
    }
    Ok(SweepResult { names: grid.names().map(str::to_owned).collect(), rows, cells: results })
}

pub fn write_sweep_summary(result: &SweepResult, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let names: Vec<&str> = result.names.iter().map(String::as_str).collect();
    write_sweep(BufWriter::new(File::create(path)?), &names, &result.rows)
}
