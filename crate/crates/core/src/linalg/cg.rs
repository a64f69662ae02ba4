use super::kernels::{axpy, dot};
use super::{DenseMatrix, DenseVector, LinalgError, Result};

pub const DEFAULT_CG_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub w: DenseVector,
    pub iterations: usize,
    /// `||r||^2` at exit.
    pub residual_sq: f64,
    pub converged: bool,
}

/// Conjugate gradient on `(A^T A + eta_r I) w = b`, warm-started at `w0`.
///
/// The right-hand side is `b` itself (not `A^T b`). The symmetrized
/// operator is applied matrix-free as `A^T (A d) + eta_r d`. Iteration stops
/// once `||r||^2 <= tol` or after `max_iters` steps; `None` means `2d`.
pub fn conjugate_gradient(
    a: &DenseMatrix,
    b: &[f64],
    w0: &[f64],
    eta_r: f64,
    tol: f64,
    max_iters: Option<usize>,
) -> Result<CgOutcome> {
    let d = a.rows();
    if a.cols() != d || b.len() != d || w0.len() != d {
        return Err(LinalgError::DimensionMismatch(format!(
            "CG expects square A matching b and w0 (A {}x{}, b {}, w0 {})",
            a.rows(),
            a.cols(),
            b.len(),
            w0.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    if !(eta_r >= 0.0) {
        return Err(LinalgError::InvalidArgument(format!("eta_r must be >= 0, got {eta_r}")));
    }
    let max_iters = max_iters.unwrap_or(2 * d);
    let apply = |v: &[f64]| -> Vec<f64> {
        let av = a.mul_vec(v);
        let mut out = a.tr_mul_vec(&av).into_inner();
        axpy(eta_r, v, &mut out);
        out
    };

    let mut w = w0.to_vec();
    let aw = apply(&w);
    let mut r: Vec<f64> = b.iter().zip(&aw).map(|(bi, ai)| bi - ai).collect();
    let mut rr = dot(&r, &r);
    if !rr.is_finite() {
        return Err(LinalgError::NonFinite("CG initial residual"));
    }
    if rr <= tol {
        return Ok(CgOutcome { w: w.into(), iterations: 0, residual_sq: rr, converged: true });
    }
    let mut dir = r.clone();
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let ad = apply(&dir);
        let curv = dot(&dir, &ad);
        if !curv.is_finite() {
            return Err(LinalgError::NonFinite("CG curvature"));
        }
        if curv <= 0.0 {
            // Zero curvature along a nonzero direction: the operator is singular here.
            break;
        }
        let alpha = rr / curv;
        axpy(alpha, &dir, &mut w);
        axpy(-alpha, &ad, &mut r);
        let rr_next = dot(&r, &r);
        if !rr_next.is_finite() {
            return Err(LinalgError::NonFinite("CG residual"));
        }
        if rr_next <= tol {
            rr = rr_next;
            return Ok(CgOutcome { w: w.into(), iterations, residual_sq: rr, converged: true });
        }
        let beta = rr_next / rr;
        for (di, &ri) in dir.iter_mut().zip(&r) {
            *di = ri + beta * *di;
        }
        rr = rr_next;
    }
    Ok(CgOutcome { w: w.into(), iterations, residual_sq: rr, converged: rr <= tol })
}
