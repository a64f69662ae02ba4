use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

use super::{EnvOutcome, EnvSpec, Environment};
use crate::features::{FeatureMap, TileCoderConfig};
use crate::Error;

const STEP: f64 = 0.05;
const RADIUS: f64 = 0.1;
const GOAL: f64 = 0.95;
const PUDDLES: [((f64, f64), (f64, f64)); 2] = [((0.45, 0.4), (0.45, 0.8)), ((0.1, 0.75), (0.45, 0.75))];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PuddleWorldParams {
    #[serde(default = "default_noise")]
    pub noise_std: f64,
}

fn default_noise() -> f64 {
    0.1
}

impl Default for PuddleWorldParams {
    fn default() -> Self {
        Self { noise_std: default_noise() }
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq > 0.0 { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len_sq).clamp(0.0, 1.0) } else { 0.0 };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

/// Summed penetration depth `max(0, radius - distance)` over both puddles.
pub fn puddle_penalty_depth(x: f64, y: f64) -> f64 {
    PUDDLES.iter().map(|&(a, b)| (RADIUS - segment_distance((x, y), a, b)).max(0.0)).sum()
}

/// Moves `(x, y)` by `0.05 + noise` along the action's axis.
///
/// Actions: 0 = +y, 1 = -y, 2 = +x, 3 = -x. Returns the next position,
/// the reward `-1 - 400 d` at that position, and whether it is in the goal.
pub fn puddle_world_step(pos: (f64, f64), action: usize, noise: f64) -> ((f64, f64), f64, bool) {
    let mag = STEP + noise;
    let (mut x, mut y) = pos;
    match action {
        0 => y += mag,
        1 => y -= mag,
        2 => x += mag,
        3 => x -= mag,
        _ => panic!("puddle world has 4 actions"),
    }
    let (x, y) = (x.clamp(0.0, 1.0), y.clamp(0.0, 1.0));
    let reward = -1.0 - 400.0 * puddle_penalty_depth(x, y);
    ((x, y), reward, x >= GOAL && y >= GOAL)
}

#[derive(Debug, Clone)]
pub struct PuddleWorld {
    spec: EnvSpec,
    noise: Normal<f64>,
    pos: (f64, f64),
    rng: ChaCha8Rng,
}

impl PuddleWorld {
    pub fn new(params: PuddleWorldParams, seed: u64) -> Result<Self, Error> {
        if !(params.noise_std >= 0.0) {
            return Err(Error::Config(format!("puddle_world noise_std must be >= 0, got {}", params.noise_std)));
        }
        let noise = Normal::new(0.0, params.noise_std)
            .map_err(|e| Error::Config(format!("puddle_world noise_std {}: {e}", params.noise_std)))?;
        Ok(Self {
            spec: EnvSpec {
                name: "puddle_world",
                observation_dim: 2,
                num_actions: 4,
                gamma: 1.0,
                episodic: true,
                max_reward: -1.0,
                observation_bounds: vec![(0.0, 1.0), (0.0, 1.0)],
            },
            noise,
            pos: (0.2, 0.55),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn position(&self) -> (f64, f64) {
        self.pos
    }

    pub fn set_position(&mut self, pos: (f64, f64)) {
        self.pos = pos;
    }
}

impl Environment for PuddleWorld {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Vec<f64> {
        self.pos = (self.rng.random_range(0.1..0.3), self.rng.random_range(0.45..0.65));
        vec![self.pos.0, self.pos.1]
    }

    fn step(&mut self, action: usize) -> EnvOutcome {
        let noise = self.noise.sample(&mut self.rng);
        let (pos, reward, terminal) = puddle_world_step(self.pos, action, noise);
        self.pos = pos;
        EnvOutcome {
            observation: vec![pos.0, pos.1],
            reward,
            discount: if terminal { 0.0 } else { 1.0 },
            terminal,
        }
    }

    fn feature_map(&self) -> FeatureMap {
        FeatureMap::tiled(
            TileCoderConfig {
                num_tilings: 5,
                tiles_per_dim: vec![5, 5],
                hash_size: 128,
                bounds: self.spec.observation_bounds.clone(),
                seed: 0,
            },
            4,
        )
        .expect("static tile coder config")
    }
}
