use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::core::LstdSystem;
use super::{argmax, check_finite, check_scalar, optimistic_values, Learner, Trace, Transition};
use crate::features::SparseFeatures;
use crate::linalg::{DenseMatrix, EmaMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UclsConfig {
    pub p: f64,
    pub eta: f64,
    pub beta: f64,
    pub lambda: f64,
    /// Initial `c_max`; `C` starts at `c_max_init * I`.
    pub c_max_init: f64,
    /// Use the sample-average weight `beta_t = 1/t` instead of `beta`.
    pub sample_average: bool,
}

impl Default for UclsConfig {
    fn default() -> Self {
        Self { p: 0.1, eta: 1e-4, beta: 0.001, lambda: 0.9, c_max_init: 1.0, sample_average: false }
    }
}

pub(crate) fn validate_common(p: f64, beta: f64, lambda: f64, eta: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Config(format!("p must be positive, got {p}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Config(format!("beta must lie in (0, 1), got {beta}")));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Config(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::Config(format!("eta must be >= 0, got {eta}")));
    }
    Ok(())
}

/// Upper-confidence least-squares control.
#[derive(Debug, Clone)]
pub struct Ucls {
    cfg: UclsConfig,
    scale: f64,
    sys: LstdSystem,
    z: Trace,
    nu_bar: Vec<f64>,
    c_mat: DenseMatrix,
    c: Vec<f64>,
    c_max: f64,
    a_vec: Vec<f64>,
    t: u64,
}

impl Ucls {
    pub fn new(d: usize, cfg: UclsConfig) -> Result<Self> {
        validate_common(cfg.p, cfg.beta, cfg.lambda, cfg.eta)?;
        if !(cfg.c_max_init > 0.0 && cfg.c_max_init.is_finite()) {
            return Err(Error::Config(format!("c_max_init must be positive, got {}", cfg.c_max_init)));
        }
        Ok(Self {
            scale: (1.0 + 1.0 / cfg.p).sqrt(),
            sys: LstdSystem::new(d),
            z: Trace::new(d),
            nu_bar: vec![0.0; d],
            c_mat: DenseMatrix::scaled_identity(d, cfg.c_max_init),
            c: vec![1.0; d],
            c_max: cfg.c_max_init,
            a_vec: vec![0.0; d],
            t: 0,
            cfg,
        })
    }

    pub fn config(&self) -> &UclsConfig {
        &self.cfg
    }

    pub fn covariance(&self) -> &DenseMatrix {
        &self.c_mat
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    /// Per-feature decay products `c`.
    pub fn decay_products(&self) -> &[f64] {
        &self.c
    }

    pub fn nu_bar(&self) -> &[f64] {
        &self.nu_bar
    }

    pub fn b_vector(&self) -> &[f64] {
        &self.sys.b
    }

    pub fn a_matrix(&self) -> &EmaMatrix {
        &self.sys.a
    }

    /// The approximate inverse `B` (not transposed).
    pub fn approx_inverse(&self) -> DenseMatrix {
        self.sys.bm.to_dense()
    }

    pub fn trace(&self) -> &Trace {
        &self.z
    }

    /// Confidence radius `sqrt((1 + 1/p) max(0, x^T C x))`.
    pub fn radius(&self, x: &SparseFeatures) -> f64 {
        self.scale * self.c_mat.quad_form_indices(x.active()).max(0.0).sqrt()
    }
}

impl Learner for Ucls {
    fn select(&mut self, actions: &[SparseFeatures], _rng: &mut ChaCha8Rng) -> usize {
        argmax(&optimistic_values(actions, &self.sys.w, &self.c_mat, self.scale))
    }

    fn update(&mut self, t: &Transition<'_>) -> Result<()> {
        self.t += 1;
        let beta = if self.cfg.sample_average { 1.0 / self.t as f64 } else { self.cfg.beta };
        let keep = 1.0 - beta;
        let x = t.x().active();
        let delta = t.td_error(&self.sys.w);
        check_scalar("TD error", delta)?;

        self.z.decay_and_add(t.gamma * self.cfg.lambda, x);
        let u = t.td_direction();
        self.sys.ema_update(beta, self.z.entries(), &u, t.reward);
        self.sys.update_inverse(x);

        self.nu_bar.iter_mut().for_each(|v| *v *= keep);
        for (i, zi) in self.z.entries() {
            self.nu_bar[i] += beta * delta * zi;
        }
        let nu = std::mem::take(&mut self.nu_bar);
        let mut a = std::mem::take(&mut self.a_vec);
        self.sys.solve_step_with(self.cfg.eta, &nu, &mut a);
        self.nu_bar = nu;

        let peak = a.iter().fold(0.0f64, |m, &ai| m.max(ai * ai));
        check_scalar("confidence statistic", peak)?;
        if peak > self.c_max {
            let grow = peak - self.c_max;
            for (i, &ci) in self.c.iter().enumerate() {
                self.c_mat[(i, i)] += ci * grow;
            }
            self.c_max = peak;
        }
        let support = self.z.support();
        for &i in support {
            self.c[i] *= keep;
            let ai = beta * a[i];
            let row = self.c_mat.row_mut(i);
            for &j in support {
                row[j] = keep * row[j] + ai * a[j];
            }
        }
        self.a_vec = a;
        check_finite("weights", &self.sys.w)
    }

    fn end_episode(&mut self) {
        self.z.clear();
    }

    fn weights(&self) -> &[f64] {
        &self.sys.w
    }
}
