use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EnvOutcome, EnvSpec, Environment};
use crate::features::FeatureMap;

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;
const GAMMA: f64 = 0.9;
pub const ONE_STATE_RIGHT_REWARDS: [f64; 5] = [-5.0, -2.0, 2.0, 5.0, 10.0];

/// Left pays 1; right pays a uniform draw from [`ONE_STATE_RIGHT_REWARDS`].
pub fn one_state_step<R: Rng + ?Sized>(action: usize, rng: &mut R) -> f64 {
    match action {
        LEFT => 1.0,
        RIGHT => ONE_STATE_RIGHT_REWARDS[rng.random_range(0..ONE_STATE_RIGHT_REWARDS.len())],
        _ => panic!("one-state world has 2 actions"),
    }
}

#[derive(Debug, Clone)]
pub struct OneState {
    spec: EnvSpec,
    rng: ChaCha8Rng,
}

impl OneState {
    pub fn new(seed: u64) -> Self {
        Self {
            spec: EnvSpec {
                name: "one_state",
                observation_dim: 1,
                num_actions: 2,
                gamma: GAMMA,
                episodic: false,
                max_reward: 10.0,
                observation_bounds: vec![(0.0, 0.0)],
            },
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Environment for OneState {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Vec<f64> {
        vec![0.0]
    }

    fn step(&mut self, action: usize) -> EnvOutcome {
        let reward = one_state_step(action, &mut self.rng);
        EnvOutcome { observation: vec![0.0], reward, discount: GAMMA, terminal: false }
    }

    fn feature_map(&self) -> FeatureMap {
        FeatureMap::tabular(1, 2)
    }

    fn optimal_action(&self) -> Option<usize> {
        Some(RIGHT)
    }
}
