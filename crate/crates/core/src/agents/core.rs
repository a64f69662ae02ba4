//! Shared least-squares machinery: EMA system `(A, b)`, approximate inverse
//! `B ~ A^{-T}` and the preconditioned fixed-point iteration for `w`.

use crate::linalg::{kernels, stepsize_from_norms, ApproxInverse, EmaMatrix};

#[derive(Debug, Clone)]
pub(crate) struct LstdSystem {
    pub a: EmaMatrix,
    pub b: Vec<f64>,
    pub bm: ApproxInverse,
    pub w: Vec<f64>,
    /// `b - A w` from the most recent [`Self::update_inverse`].
    pub residual: Vec<f64>,
    bx: Vec<f64>,
    r1: Vec<f64>,
    g: Vec<f64>,
    aw: Vec<f64>,
    step: Vec<f64>,
}

impl LstdSystem {
    pub fn new(d: usize) -> Self {
        Self {
            a: EmaMatrix::zeros(d),
            b: vec![0.0; d],
            bm: ApproxInverse::identity(d),
            w: vec![0.0; d],
            residual: vec![0.0; d],
            bx: vec![0.0; d],
            r1: vec![0.0; d],
            g: vec![0.0; d],
            aw: vec![0.0; d],
            step: vec![0.0; d],
        }
    }

    /// `A <- (1-beta) A + beta u v^T` and `b <- (1-beta) b + beta coef u`.
    pub fn ema_update<U>(&mut self, beta: f64, u: U, v: &[(usize, f64)], b_coef: f64)
    where
        U: IntoIterator<Item = (usize, f64)> + Clone,
    {
        self.a.decay(beta);
        self.a.add_outer(beta, u.clone(), v);
        let keep = 1.0 - beta;
        self.b.iter_mut().for_each(|x| *x *= keep);
        if b_coef != 0.0 {
            for (i, ui) in u {
                self.b[i] += beta * b_coef * ui;
            }
        }
    }

    /// Adaptive-step gradient update of `B` for binary `x`, then caches `b - A w`.
    pub fn update_inverse(&mut self, x: &[usize]) {
        let alpha = stepsize_from_norms(self.a.frobenius_sq(), x.len() as f64);
        self.bm.apply_binary(x, &mut self.bx);
        self.a.tr_mul_vec_into(&self.bx, &mut self.r1);
        for &j in x {
            self.r1[j] -= 1.0;
        }
        self.a.mul_vec2_into(&self.r1, &self.w, &mut self.g, &mut self.aw);
        self.bm.column_update(x, alpha, &self.g);
        for ((r, &bi), &ai) in self.residual.iter_mut().zip(&self.b).zip(&self.aw) {
            *r = bi - ai;
        }
    }

    /// `w <- w + (B^T + eta I)(b - A w)` using the cached residual.
    pub fn solve_step(&mut self, eta: f64) {
        self.bm.tr_apply(&self.residual, &mut self.step);
        self.apply_step(eta);
    }

    /// As [`Self::solve_step`], also returning `B^T v` from the same pass.
    pub fn solve_step_with(&mut self, eta: f64, v: &[f64], out: &mut [f64]) {
        let (res, step) = (&self.residual, &mut self.step);
        self.bm.tr_apply2(res, v, step, out);
        self.apply_step(eta);
    }

    fn apply_step(&mut self, eta: f64) {
        kernels::axpy(1.0, &self.step, &mut self.w);
        kernels::axpy(eta, &self.residual, &mut self.w);
    }
}
