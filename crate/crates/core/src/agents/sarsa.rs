use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{check_finite, Learner, Trace, Transition};
use crate::features::SparseFeatures;
use crate::{Error, Result};

/// Epsilon-greedy selection with optional step-wise decay.
///
/// With decay enabled, `epsilon_t = epsilon * 0.2^floor(t / 100)` where `t`
/// counts learning updates. Greedy ties are broken uniformly at random.
#[derive(Debug, Clone)]
pub struct EpsilonGreedy {
    epsilon: f64,
    decay: bool,
    t: u64,
}

impl EpsilonGreedy {
    pub fn new(epsilon: f64, decay: bool) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Config(format!("epsilon must lie in [0, 1], got {epsilon}")));
        }
        Ok(Self { epsilon, decay, t: 0 })
    }

    pub fn epsilon(&self) -> f64 {
        if self.decay {
            self.epsilon * 0.2f64.powi((self.t / 100).min(i32::MAX as u64) as i32)
        } else {
            self.epsilon
        }
    }

    pub fn tick(&mut self) {
        self.t += 1;
    }

    pub fn choose(&self, values: &[f64], rng: &mut ChaCha8Rng) -> usize {
        let eps = self.epsilon();
        if eps > 0.0 && rng.random::<f64>() < eps {
            return rng.random_range(0..values.len());
        }
        let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..values.len()).filter(|&i| values[i] == best).collect();
        match ties.len() {
            0 | 1 => ties.first().copied().unwrap_or(0),
            n => ties[rng.random_range(0..n)],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SarsaConfig {
    /// Step size, divided by the number of active features.
    pub alpha: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub epsilon_decay: bool,
    /// Initial value of every weight.
    pub init: f64,
}

impl Default for SarsaConfig {
    fn default() -> Self {
        Self { alpha: 0.1, lambda: 0.9, epsilon: 0.1, epsilon_decay: false, init: 0.0 }
    }
}

/// Sarsa(lambda) with accumulating traces.
#[derive(Debug, Clone)]
pub struct Sarsa {
    cfg: SarsaConfig,
    policy: EpsilonGreedy,
    w: Vec<f64>,
    z: Trace,
}

impl Sarsa {
    pub fn new(d: usize, cfg: SarsaConfig) -> Result<Self> {
        if !(cfg.alpha > 0.0 && cfg.alpha.is_finite()) || !(0.0..=1.0).contains(&cfg.lambda) {
            return Err(Error::Config("sarsa needs alpha > 0 and lambda in [0, 1]".into()));
        }
        Ok(Self {
            policy: EpsilonGreedy::new(cfg.epsilon, cfg.epsilon_decay)?,
            w: vec![cfg.init; d],
            z: Trace::new(d),
            cfg,
        })
    }

    pub fn values(&self, actions: &[SparseFeatures]) -> Vec<f64> {
        actions.iter().map(|x| x.dot(&self.w)).collect()
    }

    /// One TD update, without touching the exploration schedule.
    pub(crate) fn learn(&mut self, t: &Transition<'_>) -> Result<()> {
        let x = t.x();
        let delta = t.td_error(&self.w);
        self.z.decay_and_add(t.gamma * self.cfg.lambda, x.active());
        let step = self.cfg.alpha / x.norm_sq().max(1.0) * delta;
        if step != 0.0 {
            for (i, zi) in self.z.entries() {
                self.w[i] += step * zi;
            }
        }
        check_finite("weights", &self.w)
    }
}

impl Learner for Sarsa {
    fn select(&mut self, actions: &[SparseFeatures], rng: &mut ChaCha8Rng) -> usize {
        let v = self.values(actions);
        self.policy.choose(&v, rng)
    }

    fn update(&mut self, t: &Transition<'_>) -> Result<()> {
        self.policy.tick();
        self.learn(t)
    }

    fn end_episode(&mut self) {
        self.z.clear();
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }
}
