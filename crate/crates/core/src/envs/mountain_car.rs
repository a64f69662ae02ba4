use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{EnvOutcome, EnvSpec, Environment};
use crate::features::{FeatureMap, TileCoderConfig};

pub const GAMMA: f64 = 0.998;
const POS_MIN: f64 = -1.2;
const POS_MAX: f64 = 0.6;
const VEL_MAX: f64 = 0.07;
const GOAL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MountainCarState {
    pub position: f64,
    pub velocity: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MountainCarParams {
    /// `-1` per step instead of `+1` at the goal.
    #[serde(default)]
    pub dense_reward: bool,
}

/// One transition of the classic dynamics with the sparse goal reward.
///
/// Returns the next state, the reward and whether the goal was reached.
pub fn sparse_mountain_car_step(s: MountainCarState, action: usize) -> (MountainCarState, f64, bool) {
    assert!(action < 3, "mountain car has 3 actions");
    let mut v = s.velocity + 0.001 * (action as f64 - 1.0) - 0.0025 * (3.0 * s.position).cos();
    v = v.clamp(-VEL_MAX, VEL_MAX);
    let mut p = (s.position + v).clamp(POS_MIN, POS_MAX);
    if p <= POS_MIN {
        p = POS_MIN;
        v = 0.0;
    }
    let goal = p >= GOAL;
    (MountainCarState { position: p, velocity: v }, if goal { 1.0 } else { 0.0 }, goal)
}

#[derive(Debug, Clone)]
pub struct MountainCar {
    spec: EnvSpec,
    params: MountainCarParams,
    state: MountainCarState,
    rng: ChaCha8Rng,
}

impl MountainCar {
    pub fn new(params: MountainCarParams, seed: u64) -> Self {
        let max_reward = if params.dense_reward { -1.0 } else { 1.0 };
        Self {
            spec: EnvSpec {
                name: "sparse_mountain_car",
                observation_dim: 2,
                num_actions: 3,
                gamma: GAMMA,
                episodic: true,
                max_reward,
                observation_bounds: vec![(POS_MIN, POS_MAX), (-VEL_MAX, VEL_MAX)],
            },
            params,
            state: MountainCarState { position: -0.5, velocity: 0.0 },
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn state(&self) -> MountainCarState {
        self.state
    }

    pub fn set_state(&mut self, s: MountainCarState) {
        self.state = s;
    }

    fn obs(&self) -> Vec<f64> {
        vec![self.state.position, self.state.velocity]
    }
}

impl Environment for MountainCar {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Vec<f64> {
        self.state = MountainCarState { position: self.rng.random_range(-0.6..-0.4), velocity: 0.0 };
        self.obs()
    }

    fn step(&mut self, action: usize) -> EnvOutcome {
        let (next, reward, terminal) = sparse_mountain_car_step(self.state, action);
        self.state = next;
        let reward = if self.params.dense_reward { -1.0 } else { reward };
        EnvOutcome { observation: self.obs(), reward, discount: if terminal { 0.0 } else { GAMMA }, terminal }
    }

    fn feature_map(&self) -> FeatureMap {
        FeatureMap::tiled(
            TileCoderConfig {
                num_tilings: 8,
                tiles_per_dim: vec![8, 8],
                hash_size: 512,
                bounds: self.spec.observation_bounds.clone(),
                seed: 0,
            },
            3,
        )
        .expect("static tile coder config")
    }
}
