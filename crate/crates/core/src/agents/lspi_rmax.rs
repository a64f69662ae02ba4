use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::core::LstdSystem;
use super::{argmax, check_finite, check_scalar, Learner, Transition};
use crate::envs::EnvSpec;
use crate::features::SparseFeatures;
use crate::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LspiRmaxConfig {
    pub eta: f64,
    pub beta: f64,
    /// Visit threshold; known means every relevant count exceeds `m`.
    pub m: u32,
    /// Predicted maximum episode length for undiscounted episodic tasks.
    pub h: f64,
    /// Overrides the optimistic return derived from the environment.
    pub g_max: Option<f64>,
}

impl Default for LspiRmaxConfig {
    fn default() -> Self {
        Self { eta: 1e-4, beta: 0.001, m: 5, h: 10_000.0, g_max: None }
    }
}

/// Whether every active feature of `x` has been counted more than `m` times.
pub fn is_known(counts: &[f64], x: &SparseFeatures, m: u32) -> bool {
    min_count(x.active().iter().map(|&i| counts[i])).is_some_and(|c| c > m as f64)
}

/// State-level query: counts are summed across the action blocks, matching
/// positions in each action's (sorted) active list, before taking the minimum.
///
/// A terminal state (no action features) is known.
pub fn is_state_known(counts: &[f64], state: &[SparseFeatures], m: u32) -> bool {
    let Some(first) = state.first() else {
        return true;
    };
    let k = first.active().len();
    debug_assert!(state.iter().all(|x| x.active().len() == k));
    let totals = (0..k).map(|pos| state.iter().map(|x| counts[x.active()[pos]]).sum::<f64>());
    min_count(totals).is_some_and(|c| c > m as f64)
}

fn min_count(values: impl Iterator<Item = f64>) -> Option<f64> {
    values.fold(None, |m, v| Some(m.map_or(v, |m: f64| m.min(v))))
}

/// Optimistic return assigned to unknown state-actions.
fn default_g_max(env: &EnvSpec, h: f64) -> f64 {
    let r = env.max_reward;
    if r < 0.0 {
        // Every step costs at least |r|, so the best return is ending at once.
        r
    } else if env.gamma < 1.0 {
        r / (1.0 - env.gamma)
    } else {
        r * h
    }
}

/// Incremental LSPI with Rmax-style optimism for rarely visited features.
#[derive(Debug, Clone)]
pub struct LspiRmax {
    cfg: LspiRmaxConfig,
    g_max: f64,
    pub(super) sys: LstdSystem,
    counts: Vec<f64>,
}

impl LspiRmax {
    pub fn new(d: usize, cfg: LspiRmaxConfig, env: &EnvSpec) -> Result<Self> {
        if !(cfg.beta > 0.0 && cfg.beta < 1.0) || !(cfg.eta >= 0.0 && cfg.eta.is_finite()) {
            return Err(Error::Config("lspi_rmax needs beta in (0, 1) and eta >= 0".into()));
        }
        if cfg.m == 0 || !(cfg.h > 0.0) {
            return Err(Error::Config("lspi_rmax needs m >= 1 and h > 0".into()));
        }
        let g_max = cfg.g_max.unwrap_or_else(|| default_g_max(env, cfg.h));
        check_scalar("g_max", g_max).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self { sys: LstdSystem::new(d), counts: vec![0.0; d], g_max, cfg })
    }

    pub fn g_max(&self) -> f64 {
        self.g_max
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn b_vector(&self) -> &[f64] {
        &self.sys.b
    }

    pub fn a_matrix(&self) -> &crate::linalg::EmaMatrix {
        &self.sys.a
    }
}

fn ones(x: &[usize]) -> Vec<(usize, f64)> {
    x.iter().map(|&i| (i, 1.0)).collect()
}

impl Learner for LspiRmax {
    fn select(&mut self, actions: &[SparseFeatures], _rng: &mut ChaCha8Rng) -> usize {
        let v: Vec<f64> = actions.iter().map(|x| x.dot(&self.sys.w)).collect();
        argmax(&v)
    }

    fn update(&mut self, t: &Transition<'_>) -> Result<()> {
        let (beta, m, g) = (self.cfg.beta, self.cfg.m, self.g_max);
        let x = t.x().active();
        let xx = ones(x);
        if is_known(&self.counts, t.x(), m) {
            if is_state_known(&self.counts, t.next_state, m) {
                let u = t.td_direction();
                self.sys.ema_update(beta, xx.iter().copied(), &u, t.reward);
            } else {
                self.sys.ema_update(beta, xx.iter().copied(), &xx, t.reward + t.gamma * g);
            }
        } else {
            self.sys.ema_update(beta, xx.iter().copied(), &xx, g);
        }
        for (a, other) in t.state.iter().enumerate() {
            if a != t.action && !is_known(&self.counts, other, m) {
                let xo = ones(other.active());
                self.sys.ema_update(beta, xo.iter().copied(), &xo, g);
            }
        }
        for &i in x {
            self.counts[i] += 1.0;
        }
        self.sys.update_inverse(x);
        self.sys.solve_step(self.cfg.eta);
        check_finite("weights", &self.sys.w)
    }

    fn weights(&self) -> &[f64] {
        &self.sys.w
    }
}
