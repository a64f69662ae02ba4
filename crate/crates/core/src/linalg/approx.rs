use super::kernels;
use super::{DenseMatrix, EmaMatrix};

/// Running approximation `B ~ A^{-T}` driven by binary sparse inputs.
///
/// Stored transposed so every access the learners need (sums of columns
/// `B x`, products `B^T v`, column updates) reads contiguous rows. Rows of
/// `B^T` that were never updated still equal the identity row.
#[derive(Debug, Clone)]
pub struct ApproxInverse {
    d: usize,
    bt: DenseMatrix,
    touched: Vec<bool>,
    touched_rows: Vec<usize>,
}

impl ApproxInverse {
    pub fn identity(d: usize) -> Self {
        Self { d, bt: DenseMatrix::identity(d), touched: vec![false; d], touched_rows: Vec::new() }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    /// `B x` for a binary `x` with the given active indices.
    pub fn apply_binary(&self, active: &[usize], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for &j in active {
            kernels::axpy(1.0, self.bt.row(j), out);
        }
    }

    /// `B^T v`.
    pub fn tr_apply(&self, v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(v);
        for &j in &self.touched_rows {
            out[j] = kernels::dot(self.bt.row(j), v);
        }
    }

    /// `(B^T v1, B^T v2)` in one pass.
    pub fn tr_apply2(&self, v1: &[f64], v2: &[f64], out1: &mut [f64], out2: &mut [f64]) {
        out1.copy_from_slice(v1);
        out2.copy_from_slice(v2);
        for &j in &self.touched_rows {
            let (a, b) = kernels::dot2(self.bt.row(j), v1, v2);
            out1[j] = a;
            out2[j] = b;
        }
    }

    /// `B <- B - alpha g x^T` for a binary `x`.
    pub fn column_update(&mut self, active: &[usize], alpha: f64, g: &[f64]) {
        for &j in active {
            if !self.touched[j] {
                self.touched[j] = true;
                self.touched_rows.push(j);
            }
            kernels::axpy(-alpha, g, self.bt.row_mut(j));
        }
    }

    /// Residual `A^T B x - x` for a binary `x`.
    pub fn residual(&self, a: &EmaMatrix, active: &[usize], scratch: &mut [f64], out: &mut [f64]) {
        self.apply_binary(active, scratch);
        a.tr_mul_vec_into(scratch, out);
        for &j in active {
            out[j] -= 1.0;
        }
    }

    /// One gradient step on `||A^T B x - x||^2` for a binary `x`.
    pub fn step(&mut self, a: &EmaMatrix, active: &[usize], alpha: f64) {
        let d = self.d;
        let mut scratch = vec![0.0; d];
        let mut resid = vec![0.0; d];
        self.residual(a, active, &mut scratch, &mut resid);
        a.mul_vec_into(&resid, &mut scratch);
        self.column_update(active, alpha, &scratch);
    }

    /// The represented `B` (not its transpose).
    pub fn to_dense(&self) -> DenseMatrix {
        self.bt.transpose()
    }

    pub fn is_finite(&self) -> bool {
        self.touched_rows.iter().all(|&j| kernels::all_finite(self.bt.row(j)))
    }
}
