use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{argmax, check_finite, check_scalar, Learner, Trace, Transition};
use crate::features::SparseFeatures;
use crate::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UclsLConfig {
    pub p: f64,
    /// Direct radius scale; overrides `sqrt(1 + 1/p)` when set.
    pub p_bar: Option<f64>,
    /// Step sizes, both divided by the number of active features.
    pub alpha: f64,
    pub alpha_var: f64,
    pub beta: f64,
    pub lambda: f64,
    pub v_init: f64,
}

impl Default for UclsLConfig {
    fn default() -> Self {
        Self { p: 0.1, p_bar: None, alpha: 0.01, alpha_var: 0.1, beta: 0.001, lambda: 0.9, v_init: 1.0 }
    }
}

/// Linear-complexity variant: TD estimates of the mean and of the variance weights.
#[derive(Debug, Clone)]
pub struct UclsL {
    cfg: UclsLConfig,
    scale: f64,
    w: Vec<f64>,
    w_var: Vec<f64>,
    w_var_init: Vec<f64>,
    c: Vec<f64>,
    v_init: f64,
    z: Trace,
}

impl UclsL {
    pub fn new(d: usize, cfg: UclsLConfig) -> Result<Self> {
        let scale = match cfg.p_bar {
            Some(s) if s >= 0.0 && s.is_finite() => s,
            Some(s) => return Err(Error::Config(format!("p_bar must be >= 0, got {s}"))),
            None if cfg.p > 0.0 => (1.0 + 1.0 / cfg.p).sqrt(),
            None => return Err(Error::Config(format!("p must be positive, got {}", cfg.p))),
        };
        if !(cfg.beta > 0.0 && cfg.beta < 1.0) || !(0.0..=1.0).contains(&cfg.lambda) {
            return Err(Error::Config("beta must lie in (0, 1) and lambda in [0, 1]".into()));
        }
        if !(cfg.alpha >= 0.0 && cfg.alpha_var >= 0.0 && cfg.v_init > 0.0) {
            return Err(Error::Config("alpha, alpha_var must be >= 0 and v_init > 0".into()));
        }
        Ok(Self {
            scale,
            w: vec![0.0; d],
            w_var: vec![0.0; d],
            w_var_init: vec![cfg.v_init; d],
            c: vec![1.0; d],
            v_init: cfg.v_init,
            z: Trace::new(d),
            cfg,
        })
    }

    pub fn w_var(&self) -> &[f64] {
        &self.w_var
    }

    pub fn w_var_init(&self) -> &[f64] {
        &self.w_var_init
    }

    pub fn v_init(&self) -> f64 {
        self.v_init
    }

    /// `scale * sqrt(max(0, (x^T w_var)^2 + sum_i x_i^2 w_varInit_i))`.
    pub fn radius(&self, x: &SparseFeatures) -> f64 {
        let m = x.dot(&self.w_var);
        let diag: f64 = x.active().iter().map(|&i| self.w_var_init[i]).sum();
        self.scale * (m * m + diag).max(0.0).sqrt()
    }
}

impl Learner for UclsL {
    fn select(&mut self, actions: &[SparseFeatures], _rng: &mut ChaCha8Rng) -> usize {
        let vals: Vec<f64> = actions.iter().map(|x| x.dot(&self.w) + self.radius(x)).collect();
        argmax(&vals)
    }

    fn update(&mut self, t: &Transition<'_>) -> Result<()> {
        let x = t.x().active();
        let delta = t.td_error(&self.w);
        let next_var = t.x_next().map_or(0.0, |xn| xn.dot(&self.w_var));
        let delta_var = delta + t.gamma * next_var - t.x().dot(&self.w_var);
        check_scalar("TD error", delta_var)?;

        self.z.decay_and_add(t.gamma * self.cfg.lambda, x);
        let norm = t.x().norm_sq().max(1.0);
        let step_var = self.cfg.alpha_var / norm * delta_var;
        for (i, zi) in self.z.entries() {
            self.w_var[i] += step_var * zi;
        }
        // Only traced entries move, so the running max only needs those.
        let peak = self.z.support().iter().fold(self.v_init, |m, &i| m.max(self.w_var[i] * self.w_var[i]));
        if peak > self.v_init {
            let grow = peak - self.v_init;
            for (wi, &ci) in self.w_var_init.iter_mut().zip(&self.c) {
                *wi += ci * grow;
            }
            self.v_init = peak;
        }
        let keep = 1.0 - self.cfg.beta;
        for &i in self.z.support() {
            self.c[i] *= keep;
            self.w_var_init[i] *= keep;
        }
        let step = self.cfg.alpha / norm * delta;
        for (i, zi) in self.z.entries() {
            self.w[i] += step * zi;
        }
        check_scalar("variance scale", self.v_init)?;
        check_finite("weights", &self.w)
    }

    fn end_episode(&mut self) {
        self.z.clear();
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }
}
