use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{Learner, Transition};
use crate::features::SparseFeatures;
use crate::Result;

/// Always takes the same action.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedAction {
    pub action: usize,
    #[serde(skip)]
    w: Vec<f64>,
}

impl FixedAction {
    pub fn new(action: usize, d: usize) -> Self {
        Self { action, w: vec![0.0; d] }
    }

    pub fn with_dim(self, d: usize) -> Self {
        Self::new(self.action, d)
    }
}

impl Default for FixedAction {
    fn default() -> Self {
        Self::new(0, 0)
    }
}

impl Learner for FixedAction {
    fn select(&mut self, _actions: &[SparseFeatures], _rng: &mut ChaCha8Rng) -> usize {
        self.action
    }

    fn update(&mut self, _t: &Transition<'_>) -> Result<()> {
        Ok(())
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }
}

/// Uniformly random actions.
#[derive(Debug, Clone)]
pub struct RandomAgent {
    w: Vec<f64>,
}

impl RandomAgent {
    pub fn new(d: usize) -> Self {
        Self { w: vec![0.0; d] }
    }
}

impl Learner for RandomAgent {
    fn select(&mut self, actions: &[SparseFeatures], rng: &mut ChaCha8Rng) -> usize {
        rng.random_range(0..actions.len())
    }

    fn update(&mut self, _t: &Transition<'_>) -> Result<()> {
        Ok(())
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct NoParams {}
