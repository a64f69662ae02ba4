//! LSTD control with two regularization styles: `eta` inside the inverse
//! (Sherman–Morrison) and Tikhonov `eta_r` outside it (conjugate gradient).

use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::sarsa::EpsilonGreedy;
use super::{check_finite, Learner, Trace, Transition};
use crate::features::SparseFeatures;
use crate::linalg::{conjugate_gradient, sherman_morrison_ema_in_place, DenseMatrix, EmaWeight, DEFAULT_CG_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularization {
    Constant,
    Fading,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LstdInConfig {
    /// Initial regularizer; the inverse starts at `I / eta`.
    pub eta: f64,
    pub lambda: f64,
    /// `fading`: `beta_t = 1/(t+1)`, so `eta` fades like `1/t`.
    /// `constant`: fixed `beta`, and `eta` decays geometrically.
    pub regularization: Regularization,
    pub beta: f64,
    pub epsilon: f64,
    pub epsilon_decay: bool,
}

impl Default for LstdInConfig {
    fn default() -> Self {
        Self {
            eta: 1.0,
            lambda: 0.9,
            regularization: Regularization::Fading,
            beta: 0.001,
            epsilon: 0.0,
            epsilon_decay: false,
        }
    }
}

fn check_lambda_beta(lambda: f64, beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Config(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Config(format!("beta must lie in (0, 1), got {beta}")));
    }
    Ok(())
}

/// LSTD(lambda) maintaining `(A + eta I)^{-1}` by Sherman–Morrison with averaging.
#[derive(Debug, Clone)]
pub struct LstdIn {
    cfg: LstdInConfig,
    policy: EpsilonGreedy,
    a_inv: DenseMatrix,
    b: Vec<f64>,
    w: Vec<f64>,
    z: Trace,
    t: u64,
}

impl LstdIn {
    pub fn new(d: usize, cfg: LstdInConfig) -> Result<Self> {
        if !(cfg.eta > 0.0 && cfg.eta.is_finite()) {
            return Err(Error::Config(format!("eta must be positive, got {}", cfg.eta)));
        }
        check_lambda_beta(cfg.lambda, cfg.beta)?;
        Ok(Self {
            policy: EpsilonGreedy::new(cfg.epsilon, cfg.epsilon_decay)?,
            a_inv: DenseMatrix::scaled_identity(d, 1.0 / cfg.eta),
            b: vec![0.0; d],
            w: vec![0.0; d],
            z: Trace::new(d),
            t: 0,
            cfg,
        })
    }

    pub fn inverse(&self) -> &DenseMatrix {
        &self.a_inv
    }

    fn beta(&self) -> Result<EmaWeight> {
        Ok(match self.cfg.regularization {
            Regularization::Fading => EmaWeight::harmonic(self.t + 1),
            Regularization::Constant => EmaWeight::new(self.cfg.beta)?,
        })
    }
}

impl Learner for LstdIn {
    fn select(&mut self, actions: &[SparseFeatures], rng: &mut ChaCha8Rng) -> usize {
        let v: Vec<f64> = actions.iter().map(|x| x.dot(&self.w)).collect();
        self.policy.choose(&v, rng)
    }

    fn update(&mut self, t: &Transition<'_>) -> Result<()> {
        self.t += 1;
        self.policy.tick();
        let d = self.w.len();
        self.z.decay_and_add(t.gamma * self.cfg.lambda, t.x().active());
        let beta = self.beta()?;
        let z = self.z.values();
        let mut v = vec![0.0; d];
        for (j, vj) in t.td_direction() {
            v[j] += vj;
        }
        sherman_morrison_ema_in_place(&mut self.a_inv, beta, z, &v)?;
        let keep = beta.retain();
        let coef = beta.get() * t.reward;
        for (bi, &zi) in self.b.iter_mut().zip(z) {
            *bi = keep * *bi + coef * zi;
        }
        self.w = self.a_inv.mul_vec(&self.b).into_inner();
        check_finite("weights", &self.w)
    }

    fn end_episode(&mut self) {
        self.z.clear();
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LstdOutConfig {
    /// Tikhonov weight; divided by `t` under `fading`.
    pub eta_r: f64,
    pub regularization: Regularization,
    /// Regularizer added inside the system matrix.
    pub eta: f64,
    pub lambda: f64,
    /// Fixed averaging weight; `None` uses `beta_t = 1/t`.
    pub beta: Option<f64>,
    pub tol: f64,
    /// CG iteration cap; `None` means `2d`.
    pub max_iters: Option<usize>,
    pub epsilon: f64,
    pub epsilon_decay: bool,
}

impl Default for LstdOutConfig {
    fn default() -> Self {
        Self {
            eta_r: 1.0,
            regularization: Regularization::Constant,
            eta: 0.0,
            lambda: 0.9,
            beta: None,
            tol: DEFAULT_CG_TOL,
            max_iters: None,
            epsilon: 0.0,
            epsilon_decay: false,
        }
    }
}

/// LSTD(lambda) solving the Tikhonov-regularized system by warm-started CG.
#[derive(Debug, Clone)]
pub struct LstdOut {
    cfg: LstdOutConfig,
    policy: EpsilonGreedy,
    /// `A + eta I`.
    m: DenseMatrix,
    b: Vec<f64>,
    w: Vec<f64>,
    z: Trace,
    t: u64,
}

impl LstdOut {
    pub fn new(d: usize, cfg: LstdOutConfig) -> Result<Self> {
        if !(cfg.eta_r >= 0.0 && cfg.eta >= 0.0 && cfg.tol > 0.0) {
            return Err(Error::Config("lstd_out needs eta_r >= 0, eta >= 0 and tol > 0".into()));
        }
        check_lambda_beta(cfg.lambda, cfg.beta.unwrap_or(0.5))?;
        Ok(Self {
            policy: EpsilonGreedy::new(cfg.epsilon, cfg.epsilon_decay)?,
            m: DenseMatrix::scaled_identity(d, cfg.eta),
            b: vec![0.0; d],
            w: vec![0.0; d],
            z: Trace::new(d),
            t: 0,
            cfg,
        })
    }

    pub fn system(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn b_vector(&self) -> &[f64] {
        &self.b
    }

    pub fn eta_r(&self) -> f64 {
        match self.cfg.regularization {
            Regularization::Constant => self.cfg.eta_r,
            Regularization::Fading => self.cfg.eta_r / self.t.max(1) as f64,
        }
    }
}

impl Learner for LstdOut {
    fn select(&mut self, actions: &[SparseFeatures], rng: &mut ChaCha8Rng) -> usize {
        let v: Vec<f64> = actions.iter().map(|x| x.dot(&self.w)).collect();
        self.policy.choose(&v, rng)
    }

    fn update(&mut self, t: &Transition<'_>) -> Result<()> {
        self.t += 1;
        self.policy.tick();
        self.z.decay_and_add(t.gamma * self.cfg.lambda, t.x().active());
        let beta = self.cfg.beta.unwrap_or(1.0 / self.t as f64);
        let keep = 1.0 - beta;
        self.m.scale(keep);
        let u = t.td_direction();
        for (i, zi) in self.z.entries() {
            let row = self.m.row_mut(i);
            for &(j, uj) in &u {
                row[j] += beta * zi * uj;
            }
        }
        if self.cfg.eta != 0.0 {
            for i in 0..self.w.len() {
                self.m.row_mut(i)[i] += beta * self.cfg.eta;
            }
        }
        self.b.iter_mut().for_each(|v| *v *= keep);
        for (i, zi) in self.z.entries() {
            self.b[i] += beta * t.reward * zi;
        }
        let out = conjugate_gradient(&self.m, &self.b, &self.w, self.eta_r(), self.cfg.tol, self.cfg.max_iters)?;
        self.w = out.w.into_inner();
        check_finite("weights", &self.w)
    }

    fn end_episode(&mut self) {
        self.z.clear();
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }
}
