//! Learning and control algorithms.
//!
//! Every algorithm is a [`Learner`] over sparse state-action features. A
//! [`Controller`] pairs a learner with a [`FeatureMap`] and exposes the
//! observation-level [`Agent`] contract used by the harness. The controller
//! selects the next action with the pre-update parameters and then hands
//! the full transition (including that action) to the learner, matching
//! on-policy Sarsa-style ordering.

mod core;
mod gv_ucb;
mod lspi_rmax;
mod lstd;
mod sarsa;
mod simple;
mod trace;
mod ucbootstrap;
mod ucls;
mod ucls_l;

pub use gv_ucb::{GvUcb, GvUcbConfig};
pub use lspi_rmax::{is_known, is_state_known, LspiRmax, LspiRmaxConfig};
pub use lstd::{LstdIn, LstdInConfig, LstdOut, LstdOutConfig, Regularization};
pub use sarsa::{EpsilonGreedy, Sarsa, SarsaConfig};
pub use simple::{FixedAction, RandomAgent};
pub use trace::{Trace, TRACE_FLOOR};
pub use ucbootstrap::{bootstrap_index, bootstrap_upper_bound, BootstrapConfig, UcBootstrap};
pub use ucls::{Ucls, UclsConfig};
pub use ucls_l::{UclsL, UclsLConfig};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::envs::EnvSpec;
use crate::features::{FeatureMap, SparseFeatures};
use crate::linalg::DenseMatrix;
use crate::{Error, Result};

/// One on-policy transition, with features of every action at both states.
#[derive(Debug, Clone, Copy)]
pub struct Transition<'a> {
    pub state: &'a [SparseFeatures],
    pub action: usize,
    pub reward: f64,
    /// Discount applied to the next state; `0` on terminal transitions.
    pub gamma: f64,
    /// Empty when the transition is terminal.
    pub next_state: &'a [SparseFeatures],
    pub next_action: Option<usize>,
}

impl<'a> Transition<'a> {
    #[inline]
    pub fn x(&self) -> &'a SparseFeatures {
        &self.state[self.action]
    }

    #[inline]
    pub fn x_next(&self) -> Option<&'a SparseFeatures> {
        self.next_action.map(|a| &self.next_state[a])
    }

    pub fn is_terminal(&self) -> bool {
        self.next_action.is_none()
    }

    /// `x - gamma x'` as a sparse list with merged duplicate indices.
    pub fn td_direction(&self) -> Vec<(usize, f64)> {
        let x = self.x().active();
        let mut out: Vec<(usize, f64)> = x.iter().map(|&i| (i, 1.0)).collect();
        if let Some(xn) = self.x_next() {
            if self.gamma != 0.0 {
                for &j in xn.active() {
                    match x.binary_search(&j) {
                        Ok(k) => out[k].1 -= self.gamma,
                        Err(_) => out.push((j, -self.gamma)),
                    }
                }
            }
        }
        out
    }

    /// `r + gamma x'^T w - x^T w`.
    pub fn td_error(&self, w: &[f64]) -> f64 {
        let next = self.x_next().map_or(0.0, |xn| xn.dot(w));
        self.reward + self.gamma * next - self.x().dot(w)
    }
}

/// Incremental learner over sparse features.
pub trait Learner: Send {
    /// Chooses an action given the features of every action at a state.
    fn select(&mut self, actions: &[SparseFeatures], rng: &mut ChaCha8Rng) -> usize;

    fn update(&mut self, t: &Transition<'_>) -> Result<()>;

    /// Clears per-episode state such as eligibility traces.
    fn end_episode(&mut self) {}

    /// Current value weights.
    fn weights(&self) -> &[f64];
}

/// Observation-level agent contract.
pub trait Agent: Send {
    fn select_action(&mut self, observation: &[f64]) -> usize;
    fn observe(&mut self, reward: f64, discount: f64, next_observation: &[f64], terminal: bool) -> Result<()>;
    fn end_episode(&mut self);
}

pub struct Controller<L> {
    learner: L,
    features: FeatureMap,
    rng: ChaCha8Rng,
    current: Option<(Vec<SparseFeatures>, usize)>,
}

impl<L: Learner> Controller<L> {
    pub fn new(learner: L, features: FeatureMap, seed: u64) -> Self {
        Self { learner, features, rng: ChaCha8Rng::seed_from_u64(seed), current: None }
    }

    pub fn learner(&self) -> &L {
        &self.learner
    }

    pub fn features(&self) -> &FeatureMap {
        &self.features
    }
}

impl<L: Learner> Agent for Controller<L> {
    /// Returns the action already chosen for this state when one is pending
    /// (after a non-terminal `observe`); `observation` is then ignored.
    fn select_action(&mut self, observation: &[f64]) -> usize {
        if let Some((_, a)) = &self.current {
            return *a;
        }
        let xs = self.features.all_actions(observation);
        let a = self.learner.select(&xs, &mut self.rng);
        self.current = Some((xs, a));
        a
    }

    fn observe(&mut self, reward: f64, discount: f64, next_observation: &[f64], terminal: bool) -> Result<()> {
        let (xs, a) = self
            .current
            .take()
            .ok_or_else(|| Error::Config("observe called before select_action".into()))?;
        let (next_xs, next_a) = if terminal {
            (Vec::new(), None)
        } else {
            let nx = self.features.all_actions(next_observation);
            let na = self.learner.select(&nx, &mut self.rng);
            (nx, Some(na))
        };
        let t = Transition {
            state: &xs,
            action: a,
            reward,
            gamma: if terminal { 0.0 } else { discount },
            next_state: &next_xs,
            next_action: next_a,
        };
        self.learner.update(&t)?;
        if let Some(na) = next_a {
            self.current = Some((next_xs, na));
        }
        Ok(())
    }

    fn end_episode(&mut self) {
        self.learner.end_episode();
        self.current = None;
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `x^T C x` for a binary feature vector.
#[inline]
pub fn feature_quad_form(c: &DenseMatrix, x: &SparseFeatures) -> f64 {
    c.quad_form_indices(x.active())
}

/// Optimistic values `x_a^T w + scale * sqrt(max(0, x_a^T C x_a))` per action.
pub fn optimistic_values(actions: &[SparseFeatures], w: &[f64], c: &DenseMatrix, scale: f64) -> Vec<f64> {
    actions
        .iter()
        .map(|x| x.dot(w) + scale * feature_quad_form(c, x).max(0.0).sqrt())
        .collect()
}

/// Greedy action on `x_a^T w + sqrt((1 + 1/p) max(0, x_a^T C x_a))`.
pub fn get_optimistic_action(actions: &[SparseFeatures], w: &[f64], c: &DenseMatrix, p: f64) -> usize {
    argmax(&optimistic_values(actions, w, c, (1.0 + 1.0 / p).sqrt()))
}

pub const AGENT_NAMES: [&str; 10] =
    ["ucls", "gv_ucb", "ucls_l", "sarsa", "ucbootstrap", "lspi_rmax", "lstd_in", "lstd_out", "fixed", "random"];

fn parse<T: DeserializeOwned + Default>(name: &str, params: &Value) -> Result<T> {
    match params {
        Value::Null => Ok(T::default()),
        v => serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("agent `{name}` params: {e}"))),
    }
}

fn boxed<L: Learner + 'static>(l: L, features: FeatureMap, seed: u64) -> Box<dyn Agent> {
    Box::new(Controller::new(l, features, seed))
}

/// Builds an agent by its registry name.
pub fn make_agent(name: &str, params: &Value, env: &EnvSpec, features: FeatureMap, seed: u64) -> Result<Box<dyn Agent>> {
    let d = features.dim();
    let n = features.num_actions();
    if n != env.num_actions {
        return Err(Error::Config(format!("feature map has {n} actions, environment has {}", env.num_actions)));
    }
    Ok(match name {
        "ucls" => boxed(Ucls::new(d, parse(name, params)?)?, features, seed),
        "gv_ucb" => boxed(GvUcb::new(d, parse(name, params)?)?, features, seed),
        "ucls_l" => boxed(UclsL::new(d, parse(name, params)?)?, features, seed),
        "sarsa" => boxed(Sarsa::new(d, parse(name, params)?)?, features, seed),
        "ucbootstrap" => boxed(UcBootstrap::new(d, parse(name, params)?)?, features, seed),
        "lspi_rmax" => {
            let cfg: LspiRmaxConfig = parse(name, params)?;
            boxed(LspiRmax::new(d, cfg, env)?, features, seed)
        }
        "lstd_in" => boxed(LstdIn::new(d, parse(name, params)?)?, features, seed),
        "lstd_out" => boxed(LstdOut::new(d, parse(name, params)?)?, features, seed),
        "fixed" => {
            let f: FixedAction = parse(name, params)?;
            if f.action >= n {
                return Err(Error::Config(format!("fixed action {} out of range", f.action)));
            }
            boxed(f.with_dim(d), features, seed)
        }
        "random" => {
            let _: simple::NoParams = parse(name, params)?;
            boxed(RandomAgent::new(d), features, seed)
        }
        other => return Err(Error::Config(format!("unknown agent `{other}`"))),
    })
}

pub(crate) fn check_finite(what: &str, values: &[f64]) -> Result<()> {
    if crate::linalg::kernels::all_finite(values) {
        Ok(())
    } else {
        Err(Error::Diverged(format!("non-finite {what}")))
    }
}

pub(crate) fn check_scalar(what: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Diverged(format!("non-finite {what}: {v}")))
    }
}
