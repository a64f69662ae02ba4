use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::core::LstdSystem;
use super::ucls::validate_common;
use super::{argmax, check_finite, check_scalar, optimistic_values, Learner, Trace, Transition};
use crate::features::SparseFeatures;
use crate::linalg::{kernels, DenseMatrix, EmaMatrix};
use crate::Result;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GvUcbConfig {
    pub p: f64,
    pub eta: f64,
    pub beta: f64,
    pub lambda: f64,
}

impl Default for GvUcbConfig {
    fn default() -> Self {
        Self { p: 0.01, eta: 1e-4, beta: 0.001, lambda: 0.9 }
    }
}

/// UCB with a single global noise variance `sigma^2` scaling the radius.
#[derive(Debug, Clone)]
pub struct GvUcb {
    cfg: GvUcbConfig,
    scale: f64,
    sys: LstdSystem,
    z: Trace,
    z_bar: Vec<f64>,
    c_mat: DenseMatrix,
    a_vec: Vec<f64>,
    r_bar: f64,
    r2_bar: f64,
    d_bar: Vec<f64>,
    dr_bar: Vec<f64>,
    big_d_bar: EmaMatrix,
    sigma: f64,
}

impl GvUcb {
    pub fn new(d: usize, cfg: GvUcbConfig) -> Result<Self> {
        validate_common(cfg.p, cfg.beta, cfg.lambda, cfg.eta)?;
        Ok(Self {
            scale: (1.0 + 1.0 / cfg.p).sqrt(),
            sys: LstdSystem::new(d),
            z: Trace::new(d),
            z_bar: vec![0.0; d],
            c_mat: DenseMatrix::identity(d),
            a_vec: vec![0.0; d],
            r_bar: 0.0,
            r2_bar: 100.0,
            d_bar: vec![0.0; d],
            dr_bar: vec![0.0; d],
            big_d_bar: EmaMatrix::zeros(d),
            sigma: 1.0,
            cfg,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn covariance(&self) -> &DenseMatrix {
        &self.c_mat
    }

    /// `sigma * sqrt((1 + 1/p) max(0, x^T C x))`.
    pub fn radius(&self, x: &SparseFeatures) -> f64 {
        self.sigma * self.scale * self.c_mat.quad_form_indices(x.active()).max(0.0).sqrt()
    }
}

impl Learner for GvUcb {
    fn select(&mut self, actions: &[SparseFeatures], _rng: &mut ChaCha8Rng) -> usize {
        argmax(&optimistic_values(actions, &self.sys.w, &self.c_mat, self.sigma * self.scale))
    }

    fn update(&mut self, t: &Transition<'_>) -> Result<()> {
        let beta = self.cfg.beta;
        let keep = 1.0 - beta;
        let r = t.reward;
        let x = t.x().active();
        check_scalar("TD error", t.td_error(&self.sys.w))?;

        self.z.decay_and_add(t.gamma * self.cfg.lambda, x);
        let u = t.td_direction();
        self.sys.ema_update(beta, self.z.entries(), &u, r);

        // Covariance from the current B, before B moves this step.
        self.z_bar.iter_mut().for_each(|v| *v *= keep);
        for (i, zi) in self.z.entries() {
            self.z_bar[i] += beta * zi;
        }
        self.sys.bm.tr_apply(&self.z_bar, &mut self.a_vec);
        let a = &self.a_vec;
        let support = self.z.support();
        for &i in support {
            let ai = beta * a[i];
            let row = self.c_mat.row_mut(i);
            for &j in support {
                row[j] = keep * row[j] + ai * a[j];
            }
        }

        self.r_bar = keep * self.r_bar + beta * r;
        self.r2_bar = keep * self.r2_bar + beta * r * r;
        self.d_bar.iter_mut().for_each(|v| *v *= keep);
        self.dr_bar.iter_mut().for_each(|v| *v *= keep);
        for &(j, uj) in &u {
            self.d_bar[j] += beta * uj;
            self.dr_bar[j] += beta * r * uj;
        }
        self.big_d_bar.decay(beta);
        self.big_d_bar.add_outer(beta, u.iter().copied(), &u);
        let w = &self.sys.w;
        let nu = self.r_bar - kernels::dot(&self.d_bar, w);
        let nu2 = self.r2_bar - 2.0 * kernels::dot(&self.dr_bar, w) + self.big_d_bar.quad_form(w);
        self.sigma = (nu2 - nu * nu).max(0.0).sqrt();
        check_scalar("sigma", self.sigma)?;

        self.sys.update_inverse(x);
        self.sys.solve_step(self.cfg.eta);
        check_finite("weights", &self.sys.w)
    }

    fn end_episode(&mut self) {
        self.z.clear();
    }

    fn weights(&self) -> &[f64] {
        &self.sys.w
    }
}
