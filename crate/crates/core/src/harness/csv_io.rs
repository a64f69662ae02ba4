//! CSV formats written by experiments, plus strict readers for them.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{AggregateCurve, CurvePoint, EpisodeRecord, RunLog, StepRecord};
use crate::{Error, Result};

pub const STEP_HEADER: [&str; 7] = ["run", "step", "episode", "action", "reward", "terminal", "truncated"];
pub const EPISODE_HEADER: [&str; 4] = ["run", "episode", "length", "return"];
pub const AGGREGATE_HEADER: [&str; 4] = ["x", "mean", "stderr", "n"];
pub const SWEEP_TAIL: [&str; 4] = ["metric", "mean", "stderr", "failures"];

#[derive(Debug, Serialize, Deserialize)]
struct StepRow {
    run: usize,
    step: usize,
    episode: usize,
    action: usize,
    reward: f64,
    terminal: bool,
    truncated: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct EpisodeRow {
    run: usize,
    episode: usize,
    length: usize,
    #[serde(rename = "return")]
    ret: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct AggregateRow {
    x: usize,
    mean: f64,
    stderr: f64,
    n: usize,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Csv(msg.into())
}

fn reader<R: Read>(input: R, header: &[&str]) -> Result<csv::Reader<R>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let got: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if got != header {
        return Err(bad(format!("expected header `{}`, found `{}`", header.join(","), got.join(","))));
    }
    Ok(r)
}

/// Headers are written explicitly, never derived from row structs.
fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

pub fn write_steps<W: Write>(out: W, runs: &[RunLog]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(STEP_HEADER)?;
    for r in runs {
        for s in &r.steps {
            w.serialize(StepRow {
                run: r.run,
                step: s.step,
                episode: s.episode,
                action: s.action,
                reward: s.reward,
                terminal: s.terminal,
                truncated: s.truncated,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a per-step file back into run logs, checking that every run's
/// steps are contiguous from 0 and that episode indices follow the
/// terminal flags. Optimality labels are not stored and come back as `None`.
pub fn read_steps<R: Read>(input: R) -> Result<Vec<RunLog>> {
    let mut runs: Vec<RunLog> = Vec::new();
    for row in reader(input, &STEP_HEADER)?.deserialize() {
        let row: StepRow = row?;
        if runs.last().is_none_or(|r| r.run != row.run) {
            if runs.iter().any(|r| r.run == row.run) {
                return Err(bad(format!("run {} is not contiguous", row.run)));
            }
            runs.push(RunLog { run: row.run, steps: Vec::new(), failure: None });
        }
        let steps = &mut runs.last_mut().expect("pushed above").steps;
        let expected_episode = steps.last().map_or(0, |p: &StepRecord| p.episode + usize::from(p.terminal));
        if row.step != steps.len() {
            return Err(bad(format!("run {}: step {} out of order", row.run, row.step)));
        }
        if row.episode != expected_episode {
            return Err(bad(format!("run {}: step {} has episode {}", row.run, row.step, row.episode)));
        }
        if row.truncated && !row.terminal {
            return Err(bad(format!("run {}: step {} truncated but not terminal", row.run, row.step)));
        }
        steps.push(StepRecord {
            step: row.step,
            episode: row.episode,
            action: row.action,
            reward: row.reward,
            terminal: row.terminal,
            truncated: row.truncated,
            optimal: None,
        });
    }
    Ok(runs)
}

pub fn write_episodes<W: Write>(out: W, runs: &[RunLog]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(EPISODE_HEADER)?;
    for r in runs {
        for e in r.episodes() {
            w.serialize(EpisodeRow { run: r.run, episode: e.episode, length: e.length, ret: e.ret })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_episodes<R: Read>(input: R) -> Result<Vec<(usize, EpisodeRecord)>> {
    reader(input, &EPISODE_HEADER)?
        .deserialize()
        .map(|row| {
            let row: EpisodeRow = row?;
            if row.length == 0 {
                return Err(bad(format!("run {} episode {} has zero length", row.run, row.episode)));
            }
            Ok((row.run, EpisodeRecord { episode: row.episode, length: row.length, ret: row.ret }))
        })
        .collect()
}

pub fn write_aggregate<W: Write>(out: W, curve: &AggregateCurve) -> Result<()> {
    let mut w = writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for p in &curve.points {
        w.serialize(AggregateRow { x: p.x, mean: p.mean, stderr: p.stderr, n: p.n })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregate<R: Read>(input: R) -> Result<AggregateCurve> {
    let points = reader(input, &AGGREGATE_HEADER)?
        .deserialize()
        .map(|row| {
            let row: AggregateRow = row?;
            Ok(CurvePoint { x: row.x, mean: row.mean, stderr: row.stderr, n: row.n })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AggregateCurve { points })
}

/// One row of a sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub values: Vec<serde_json::Value>,
    pub metric: &'static str,
    pub mean: f64,
    pub stderr: f64,
    pub failures: usize,
}

fn cell_text(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn write_sweep<W: Write>(out: W, names: &[&str], rows: &[SweepRow]) -> Result<()> {
    let mut w = writer(out);
    w.write_record(names.iter().copied().chain(SWEEP_TAIL))?;
    for r in rows {
        let mut rec: Vec<String> = r.values.iter().map(cell_text).collect();
        rec.extend([r.metric.to_owned(), r.mean.to_string(), r.stderr.to_string(), r.failures.to_string()]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
