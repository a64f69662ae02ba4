//! Benchmark environments behind a common step/reset contract.
//!
//! Every environment owns its RNG and is deterministic given its seed and
//! the action sequence it receives.

mod mountain_car;
mod one_state;
mod puddle_world;
mod river_swim;

pub use mountain_car::{sparse_mountain_car_step, MountainCar, MountainCarParams, MountainCarState};
pub use one_state::{one_state_step, OneState, ONE_STATE_RIGHT_REWARDS};
pub use puddle_world::{puddle_penalty_depth, puddle_world_step, PuddleWorld, PuddleWorldParams};
pub use river_swim::{river_swim_step, RiverSwim};

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::features::FeatureMap;
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvOutcome {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// `0` on terminal transitions, the environment's `gamma` otherwise.
    pub discount: f64,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: &'static str,
    pub observation_dim: usize,
    pub num_actions: usize,
    pub gamma: f64,
    pub episodic: bool,
    /// Largest per-step reward, used for optimistic targets.
    pub max_reward: f64,
    pub observation_bounds: Vec<(f64, f64)>,
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Starts a new episode and returns the first observation.
    fn reset(&mut self) -> Vec<f64>;

    fn step(&mut self, action: usize) -> EnvOutcome;

    /// Default feature representation for agents acting here.
    fn feature_map(&self) -> FeatureMap;

    /// Best action in the current state, if the environment knows one.
    fn optimal_action(&self) -> Option<usize> {
        None
    }
}

pub const ENV_NAMES: [&str; 4] = ["sparse_mountain_car", "puddle_world", "river_swim", "one_state"];

pub(crate) fn parse_params<T: DeserializeOwned + Default>(params: &Value) -> Result<T, Error> {
    match params {
        Value::Null => Ok(T::default()),
        Value::Object(m) if m.is_empty() => Ok(T::default()),
        v => serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("environment params: {e}"))),
    }
}

fn no_params(name: &str, params: &Value) -> Result<(), Error> {
    match params {
        Value::Null => Ok(()),
        Value::Object(m) if m.is_empty() => Ok(()),
        _ => Err(Error::Config(format!("environment {name} takes no parameters"))),
    }
}

/// Builds an environment by its registry name.
pub fn make_env(name: &str, params: &Value, seed: u64) -> Result<Box<dyn Environment>, Error> {
    Ok(match name {
        "sparse_mountain_car" | "mountain_car" => Box::new(MountainCar::new(parse_params(params)?, seed)),
        "puddle_world" => Box::new(PuddleWorld::new(parse_params(params)?, seed)?),
        "river_swim" => {
            no_params(name, params)?;
            Box::new(RiverSwim::new(seed))
        }
        "one_state" => {
            no_params(name, params)?;
            Box::new(OneState::new(seed))
        }
        other => return Err(Error::Config(format!("unknown environment `{other}`"))),
    })
}
