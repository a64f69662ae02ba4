//! Seeded experiment runner: configuration, per-run execution with episode
//! cutoffs, aggregation across runs, parameter sweeps and CSV output.

mod aggregate;
mod config;
mod csv_io;
mod experiment;
mod run;

pub use aggregate::{mean_stderr, moving_average, AggregateCurve, CurvePoint, Curves, BUCKET, SMOOTHING};
pub use config::{ExperimentConfig, Named, SweepGrid, DEFAULT_CUTOFF, DEFAULT_STEPS, ENV_PREFIX};
pub use csv_io::{
    read_aggregate, read_episodes, read_steps, write_aggregate, write_episodes, write_steps, write_sweep, SweepRow,
    AGGREGATE_HEADER, EPISODE_HEADER, STEP_HEADER,
};
pub use experiment::{
    final_episode_length, run_experiment, run_sweep, write_outputs, write_sweep_summary, ExperimentResult, FailedRun,
    Stat, Summary, SweepResult, METRIC_CUMULATIVE, METRIC_FINAL_LENGTH,
};
pub use run::{run_seed, run_single, stream_seeds, EpisodeRecord, RunLog, StepRecord};
