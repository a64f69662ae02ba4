use crate::agents::make_agent;
use crate::envs::{make_env, EnvSpec};
use crate::features::mix64;
use crate::Result;

use super::ExperimentConfig;

const ENV_STREAM: u64 = 0x656e_7669_726f_6e00;
const AGENT_STREAM: u64 = 0x6167_656e_7400_0000;

/// Seed for run `run` of an experiment with base seed `base`.
pub fn run_seed(base: u64, run: usize) -> u64 {
    mix64(base ^ mix64(run as u64))
}

/// Separate environment and agent seeds derived from a run seed.
pub fn stream_seeds(run_seed: u64) -> (u64, u64) {
    (mix64(run_seed ^ ENV_STREAM), mix64(run_seed ^ AGENT_STREAM))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub episode: usize,
    pub action: usize,
    pub reward: f64,
    /// Episode ended here, either naturally or at the cutoff.
    pub terminal: bool,
    /// Episode ended because it reached the cutoff.
    pub truncated: bool,
    /// Whether `action` was optimal, for environments that know.
    pub optimal: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub length: usize,
    pub ret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub run: usize,
    pub steps: Vec<StepRecord>,
    /// Set when the agent diverged; `steps` then stops at the failure.
    pub failure: Option<String>,
}

impl RunLog {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    /// Completed episodes, in order; a trailing partial episode is omitted.
    pub fn episodes(&self) -> Vec<EpisodeRecord> {
        let mut out = Vec::new();
        let (mut length, mut ret) = (0, 0.0);
        for s in &self.steps {
            length += 1;
            ret += s.reward;
            if s.terminal {
                out.push(EpisodeRecord { episode: s.episode, length, ret });
                length = 0;
                ret = 0.0;
            }
        }
        out
    }

    pub fn num_episodes(&self) -> usize {
        self.steps.iter().filter(|s| s.terminal).count()
    }

    /// Episodes that ended in a real terminal state rather than the cutoff.
    pub fn num_goals(&self) -> usize {
        self.steps.iter().filter(|s| s.terminal && !s.truncated).count()
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    /// `(step, reward, cumulative reward)` for continuing-task views.
    pub fn continuing(&self) -> Vec<(usize, f64, f64)> {
        let mut total = 0.0;
        self.steps
            .iter()
            .map(|s| {
                total += s.reward;
                (s.step, s.reward, total)
            })
            .collect()
    }

    /// Fraction of optimal actions among the last `window` steps, if the
    /// environment labels optimality.
    pub fn optimal_rate(&self, window: usize) -> Option<f64> {
        let tail = &self.steps[self.steps.len().saturating_sub(window)..];
        let mut hits = 0usize;
        for s in tail {
            hits += usize::from(s.optimal?);
        }
        (!tail.is_empty()).then(|| hits as f64 / tail.len() as f64)
    }
}

/// Executes run `run` of `cfg`: exactly `cfg.steps` environment steps, with
/// episodes reset on termination or when they reach `cfg.cutoff` steps.
///
/// At the cutoff the agent still bootstraps from the next state before its
/// episode state is cleared. Divergence is reported inside the log.
pub fn run_single(cfg: &ExperimentConfig, run: usize) -> Result<RunLog> {
    cfg.validate()?;
    let (env_seed, agent_seed) = stream_seeds(run_seed(cfg.seed, run));
    let mut env = make_env(&cfg.env.name, &cfg.env.params, env_seed)?;
    let spec: EnvSpec = env.spec().clone();
    let mut agent = make_agent(&cfg.agent.name, &cfg.agent.params, &spec, env.feature_map(), agent_seed)?;

    let mut steps = Vec::with_capacity(cfg.steps);
    let mut failure = None;
    let (mut episode, mut length) = (0, 0);
    let mut obs = env.reset();
    for step in 0..cfg.steps {
        let optimal = env.optimal_action();
        let action = agent.select_action(&obs);
        let out = env.step(action);
        length += 1;
        let truncated = !out.terminal && spec.episodic && length >= cfg.cutoff;
        steps.push(StepRecord {
            step,
            episode,
            action,
            reward: out.reward,
            terminal: out.terminal || truncated,
            truncated,
            optimal: optimal.map(|a| a == action),
        });
        if let Err(e) = agent.observe(out.reward, out.discount, &out.observation, out.terminal) {
            failure = Some(e.to_string());
            break;
        }
        if out.terminal || truncated {
            agent.end_episode();
            obs = env.reset();
            episode += 1;
            length = 0;
        } else {
            obs = out.observation;
        }
    }
    Ok(RunLog { run, steps, failure })
}
