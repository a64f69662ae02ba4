//! Dense linear algebra for incremental least-squares learners.
//!
//! Everything here is square, dense and `f64`. The agents keep their
//! statistics in these types and rely on the sparse fast paths in
//! [`kernels`] and [`EmaMatrix`] for the per-step updates.

mod approx;
mod cg;
pub mod kernels;
mod matrix;
mod scaled;

pub use approx::ApproxInverse;
pub use cg::{conjugate_gradient, CgOutcome, DEFAULT_CG_TOL};
pub use matrix::{DenseMatrix, DenseVector};
pub use scaled::EmaMatrix;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("EMA weight must lie in (0, 1], got {0}")]
    InvalidWeight(f64),
    #[error("Sherman-Morrison update undefined for beta == 1")]
    FullReplacement,
    #[error("singular rank-1 update (denominator {0:e})")]
    SingularUpdate(f64),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Exponential moving-average weight `beta` in `(0, 1]`.
///
/// `beta == 1/t` at step `t` reproduces the plain sample mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmaWeight(f64);

impl EmaWeight {
    pub fn new(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta <= 1.0 {
            Ok(Self(beta))
        } else {
            Err(LinalgError::InvalidWeight(beta))
        }
    }

    /// Sample-average weight for the `t`-th observation (1-based).
    pub fn harmonic(t: u64) -> Self {
        Self(1.0 / t.max(1) as f64)
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn retain(self) -> f64 {
        1.0 - self.0
    }
}

fn check_square(m: &DenseMatrix, what: &str) -> Result<usize> {
    if m.rows() != m.cols() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{what} is {}x{}, expected square",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.rows())
}

fn check_len(v: &[f64], d: usize, what: &str) -> Result<()> {
    if v.len() != d {
        return Err(LinalgError::DimensionMismatch(format!(
            "{what} has length {}, expected {d}",
            v.len()
        )));
    }
    Ok(())
}

/// `M <- (1 - beta) M + beta u v^T`.
pub fn ema_rank1_update(m: &mut DenseMatrix, beta: EmaWeight, u: &[f64], v: &[f64]) -> Result<()> {
    let d = check_square(m, "M")?;
    check_len(u, d, "u")?;
    check_len(v, d, "v")?;
    let keep = beta.retain();
    let b = beta.get();
    for (i, &ui) in u.iter().enumerate() {
        let row = m.row_mut(i);
        let coef = b * ui;
        for (mij, &vj) in row.iter_mut().zip(v) {
            *mij = keep * *mij + coef * vj;
        }
    }
    Ok(())
}

/// Inverse of `(1 - beta) A + beta u v^T` given `a_inv = A^{-1}`.
///
/// Applies the matrix-inversion lemma to `(1-beta) A` and the rank-1 term:
///
/// ```text
/// A'^{-1} = A^{-1} / (1-beta)
///         - (beta / (1-beta)) (A^{-1} u)(v^T A^{-1}) / ((1-beta) + beta v^T A^{-1} u)
/// ```
pub fn sherman_morrison_ema(
    a_inv: &DenseMatrix,
    beta: EmaWeight,
    u: &[f64],
    v: &[f64],
) -> Result<DenseMatrix> {
    let mut out = a_inv.clone();
    sherman_morrison_ema_in_place(&mut out, beta, u, v)?;
    Ok(out)
}

/// In-place form of [`sherman_morrison_ema`]. On error `a_inv` is untouched.
pub fn sherman_morrison_ema_in_place(
    a_inv: &mut DenseMatrix,
    beta: EmaWeight,
    u: &[f64],
    v: &[f64],
) -> Result<()> {
    let d = check_square(a_inv, "A^-1")?;
    check_len(u, d, "u")?;
    check_len(v, d, "v")?;
    let b = beta.get();
    if b >= 1.0 {
        return Err(LinalgError::FullReplacement);
    }
    let keep = 1.0 - b;
    let ainv_u = a_inv.mul_vec(u);
    let vt_ainv = a_inv.tr_mul_vec(v);
    let denom = keep + b * kernels::dot(v, &ainv_u);
    if !denom.is_finite() {
        return Err(LinalgError::NonFinite("Sherman-Morrison denominator"));
    }
    if denom.abs() < 1e-12 {
        return Err(LinalgError::SingularUpdate(denom));
    }
    let scale = 1.0 / keep;
    let coef = b / keep / denom;
    for (i, &left) in ainv_u.iter().enumerate() {
        let row = a_inv.row_mut(i);
        let c = coef * left;
        for (x, &right) in row.iter_mut().zip(&vt_ainv) {
            *x = scale * *x - c * right;
        }
    }
    Ok(())
}

/// `min{1, 0.01 / (||A||_F^2 ||x||_2^2 + 1)}`.
pub fn adaptive_stepsize(a: &DenseMatrix, x: &[f64]) -> f64 {
    stepsize_from_norms(a.frobenius_sq(), kernels::dot(x, x))
}

#[inline]
pub fn stepsize_from_norms(a_frob_sq: f64, x_norm_sq: f64) -> f64 {
    (0.01 / (a_frob_sq * x_norm_sq + 1.0)).min(1.0)
}

/// One gradient step on `||A^T B x - x||^2`: `B <- B - alpha A (A^T B x - x) x^T`.
pub fn approx_inverse_step(b: &mut DenseMatrix, a: &DenseMatrix, x: &[f64], alpha: f64) -> Result<()> {
    let d = check_square(b, "B")?;
    if check_square(a, "A")? != d {
        return Err(LinalgError::DimensionMismatch("A and B differ in size".into()));
    }
    check_len(x, d, "x")?;
    if !(alpha > 0.0) {
        return Err(LinalgError::InvalidArgument(format!("alpha must be > 0, got {alpha}")));
    }
    let bx = b.mul_vec(x);
    let mut resid = a.tr_mul_vec(&bx);
    for (r, &xi) in resid.iter_mut().zip(x) {
        *r -= xi;
    }
    let g = a.mul_vec(&resid);
    for (i, &gi) in g.iter().enumerate() {
        let c = alpha * gi;
        if c == 0.0 {
            continue;
        }
        for (bij, &xj) in b.row_mut(i).iter_mut().zip(x) {
            *bij -= c * xj;
        }
    }
    Ok(())
}

/// `w' = w + (B^T + eta I)(b - A w)`.
pub fn preconditioned_solve_step(
    w: &[f64],
    b_mat: &DenseMatrix,
    a: &DenseMatrix,
    b: &[f64],
    eta: f64,
) -> Result<DenseVector> {
    let d = check_square(a, "A")?;
    if check_square(b_mat, "B")? != d {
        return Err(LinalgError::DimensionMismatch("A and B differ in size".into()));
    }
    check_len(w, d, "w")?;
    check_len(b, d, "b")?;
    let aw = a.mul_vec(w);
    let resid: Vec<f64> = b.iter().zip(aw.iter()).map(|(bi, ai)| bi - ai).collect();
    let step = b_mat.tr_mul_vec(&resid);
    Ok(w
        .iter()
        .zip(step.iter().zip(&resid))
        .map(|(wi, (si, ri))| wi + si + eta * ri)
        .collect::<Vec<_>>()
        .into())
}

#[cfg(test)]
mod tests;
