use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::sarsa::{Sarsa, SarsaConfig};
use super::{argmax, Learner, Transition};
use crate::features::SparseFeatures;
use crate::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootstrapConfig {
    /// Number of recent weight vectors kept.
    pub window: usize,
    pub block_length: usize,
    pub resamples: usize,
    pub confidence: f64,
    /// Sarsa step size (divided by the number of active features).
    pub alpha: f64,
    pub lambda: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { window: 100, block_length: 10, resamples: 50, confidence: 0.05, alpha: 0.1, lambda: 0.9 }
    }
}

/// Critical position `j` (1-based) and remainder `r` of the lower sample quantile.
pub fn bootstrap_index(resamples: usize, confidence: f64) -> (usize, f64) {
    let pos = resamples as f64 * confidence / 2.0 + (confidence + 2.0) / 6.0;
    let j = pos.floor();
    (j as usize, pos - j)
}

/// `2 mean(q) - T*_{alpha/2}` from a moving-block bootstrap of the series `q`.
///
/// `q` is in chronological order. Blocks of `block` consecutive values are
/// drawn with replacement, `floor(len / block)` per resample.
pub fn bootstrap_upper_bound<R: Rng + ?Sized>(
    q: &[f64],
    block: usize,
    resamples: usize,
    confidence: f64,
    rng: &mut R,
) -> f64 {
    let n = q.len();
    assert!(block >= 1 && block <= n, "block length must lie in [1, window]");
    let m = n / block;
    let mean = q.iter().sum::<f64>() / n as f64;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &v in q {
        prefix.push(prefix.last().unwrap() + v);
    }
    let num_blocks = n - block + 1;
    let block_sum = |k: usize| prefix[k + block] - prefix[k];
    let mut t: Vec<f64> = (0..resamples)
        .map(|_| (0..m).map(|_| block_sum(rng.random_range(0..num_blocks))).sum::<f64>() / (block * m) as f64)
        .collect();
    t.sort_by(f64::total_cmp);
    let (j, r) = bootstrap_index(resamples, confidence);
    assert!(j >= 1 && j < resamples, "quantile index {j} outside 1..{resamples}");
    let lower = (1.0 - r) * t[j - 1] + r * t[j];
    2.0 * mean - lower
}

/// Sarsa(lambda) acting on bootstrapped upper confidence bounds.
///
/// Acts uniformly at random until the window of weight vectors is full.
#[derive(Debug, Clone)]
pub struct UcBootstrap {
    cfg: BootstrapConfig,
    sarsa: Sarsa,
    window: VecDeque<Vec<f64>>,
}

impl UcBootstrap {
    pub fn new(d: usize, cfg: BootstrapConfig) -> Result<Self> {
        if cfg.block_length == 0 || cfg.block_length > cfg.window {
            return Err(Error::Config(format!(
                "block_length {} must lie in [1, window = {}]",
                cfg.block_length, cfg.window
            )));
        }
        if !(cfg.confidence > 0.0 && cfg.confidence < 1.0) {
            return Err(Error::Config(format!("confidence must lie in (0, 1), got {}", cfg.confidence)));
        }
        let (j, _) = bootstrap_index(cfg.resamples, cfg.confidence);
        if j < 1 || j >= cfg.resamples {
            return Err(Error::Config(format!(
                "{} resamples at confidence {} give quantile index {j}",
                cfg.resamples, cfg.confidence
            )));
        }
        let sarsa = Sarsa::new(
            d,
            SarsaConfig { alpha: cfg.alpha, lambda: cfg.lambda, epsilon: 0.0, ..SarsaConfig::default() },
        )?;
        Ok(Self { window: VecDeque::with_capacity(cfg.window), sarsa, cfg })
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    pub fn upper_bounds(&self, actions: &[SparseFeatures], rng: &mut ChaCha8Rng) -> Vec<f64> {
        actions
            .iter()
            .map(|x| {
                let q: Vec<f64> = self.window.iter().map(|w| x.dot(w)).collect();
                bootstrap_upper_bound(&q, self.cfg.block_length, self.cfg.resamples, self.cfg.confidence, rng)
            })
            .collect()
    }
}

impl Learner for UcBootstrap {
    fn select(&mut self, actions: &[SparseFeatures], rng: &mut ChaCha8Rng) -> usize {
        if self.window.len() < self.cfg.window {
            return rng.random_range(0..actions.len());
        }
        argmax(&self.upper_bounds(actions, rng))
    }

    fn update(&mut self, t: &Transition<'_>) -> Result<()> {
        self.sarsa.learn(t)?;
        let mut slot = if self.window.len() == self.cfg.window {
            self.window.pop_front().unwrap_or_default()
        } else {
            Vec::new()
        };
        slot.clear();
        slot.extend_from_slice(self.sarsa.weights());
        self.window.push_back(slot);
        Ok(())
    }

    fn end_episode(&mut self) {
        self.sarsa.end_episode();
    }

    fn weights(&self) -> &[f64] {
        self.sarsa.weights()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn index_for_default_parameters() {
        let (j, r) = bootstrap_index(50, 0.05);
        assert_eq!(j, 1);
        assert!((r - (1.25 + 2.05 / 6.0 - 1.0)).abs() < 1e-12);
        assert!((r - 0.591_666_666_666_666_7).abs() < 1e-12);
    }

    #[test]
    fn constant_window_gives_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = vec![3.25; 100];
        assert_eq!(bootstrap_upper_bound(&q, 10, 50, 0.05, &mut rng), 3.25);
    }

    #[test]
    fn blocks_span_block_length_values() {
        // Period-10 series: every length-10 block holds each phase once, so
        // all block means coincide and the bound collapses to the mean.
        let q: Vec<f64> = (0..100).map(|i| (i % 10) as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = bootstrap_upper_bound(&q, 10, 50, 0.05, &mut rng);
        assert!((u - 4.5).abs() < 1e-12);
        // A trending series has spread, and the bound exceeds the mean.
        let q: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let u = bootstrap_upper_bound(&q, 10, 50, 0.05, &mut rng);
        assert!(u > 49.5 && u < 99.0);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(UcBootstrap::new(4, BootstrapConfig { block_length: 0, ..Default::default() }).is_err());
        assert!(UcBootstrap::new(4, BootstrapConfig { block_length: 200, ..Default::default() }).is_err());
        assert!(UcBootstrap::new(4, BootstrapConfig { resamples: 1, ..Default::default() }).is_err());
    }
}
