use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EnvOutcome, EnvSpec, Environment};
use crate::features::{FeatureMap, TileCoderConfig};

pub const DOWN: usize = 0;
pub const UP: usize = 1;
const GAMMA: f64 = 0.99;
const MOVE: f64 = 0.1;
const BOTTOM: f64 = 0.05;
const TOP: f64 = 0.95;

/// One River Swim transition given a uniform draw `u` in `[0, 1)`.
///
/// Down always moves by -0.1. Up moves +0.1 with probability 0.3, stays
/// with probability 0.6 and drifts -0.1 with probability 0.1.
pub fn river_swim_step(s: f64, action: usize, u: f64) -> (f64, f64) {
    let delta = match action {
        DOWN => -MOVE,
        UP if u < 0.3 => MOVE,
        UP if u < 0.9 => 0.0,
        UP => -MOVE,
        _ => panic!("river swim has 2 actions"),
    };
    let next = (s + delta).clamp(0.0, 1.0);
    let reward = match action {
        DOWN if s <= BOTTOM && next <= BOTTOM => 0.005,
        UP if s >= TOP && next >= TOP => 1.0,
        _ => 0.0,
    };
    (next, reward)
}

#[derive(Debug, Clone)]
pub struct RiverSwim {
    spec: EnvSpec,
    s: f64,
    rng: ChaCha8Rng,
}

impl RiverSwim {
    pub fn new(seed: u64) -> Self {
        Self {
            spec: EnvSpec {
                name: "river_swim",
                observation_dim: 1,
                num_actions: 2,
                gamma: GAMMA,
                episodic: false,
                max_reward: 1.0,
                observation_bounds: vec![(0.0, 1.0)],
            },
            s: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn position(&self) -> f64 {
        self.s
    }

    pub fn set_position(&mut self, s: f64) {
        self.s = s;
    }
}

impl Environment for RiverSwim {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Vec<f64> {
        self.s = self.rng.random_range(0.0..0.1);
        vec![self.s]
    }

    fn step(&mut self, action: usize) -> EnvOutcome {
        let u: f64 = self.rng.random();
        let (next, reward) = river_swim_step(self.s, action, u);
        self.s = next;
        EnvOutcome { observation: vec![next], reward, discount: GAMMA, terminal: false }
    }

    fn feature_map(&self) -> FeatureMap {
        FeatureMap::tiled(
            TileCoderConfig {
                num_tilings: 4,
                tiles_per_dim: vec![32],
                hash_size: 128,
                bounds: self.spec.observation_bounds.clone(),
                seed: 0,
            },
            2,
        )
        .expect("static tile coder config")
    }

    fn optimal_action(&self) -> Option<usize> {
        Some(UP)
    }
}
