use super::kernels;
use super::DenseMatrix;

/// Square matrix tracked by exponential moving average with lazy decay.
///
/// The represented value is `scale * data`. Decaying by `(1 - beta)` only
/// touches `scale`, and rank-1 updates with sparse factors touch only the
/// affected entries, so a step costs `O(nnz(u) nnz(v))` instead of `O(d^2)`.
/// Rows that have never received an update are known to be zero and are
/// skipped by the products.
#[derive(Debug, Clone)]
pub struct EmaMatrix {
    d: usize,
    scale: f64,
    data: DenseMatrix,
    sumsq: f64,
    row_active: Vec<bool>,
    active_rows: Vec<usize>,
}

const REFOLD_BELOW: f64 = 1e-50;

impl EmaMatrix {
    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            scale: 1.0,
            data: DenseMatrix::zeros(d, d),
            sumsq: 0.0,
            row_active: vec![false; d],
            active_rows: Vec::new(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Multiplies the represented matrix by `1 - beta`; `beta >= 1` clears it.
    pub fn decay(&mut self, beta: f64) {
        if beta >= 1.0 {
            self.clear();
            return;
        }
        self.scale *= 1.0 - beta;
        if self.scale < REFOLD_BELOW {
            self.refold();
        }
    }

    pub fn clear(&mut self) {
        self.data.as_mut_slice().iter_mut().for_each(|x| *x = 0.0);
        self.scale = 1.0;
        self.sumsq = 0.0;
        self.row_active.iter_mut().for_each(|x| *x = false);
        self.active_rows.clear();
    }

    fn refold(&mut self) {
        let s = self.scale;
        for &i in &self.active_rows {
            self.data.row_mut(i).iter_mut().for_each(|x| *x *= s);
        }
        self.scale = 1.0;
        self.sumsq = self.data.frobenius_sq();
    }

    /// Adds `coef * r c^T` where `r` and `c` are given as sparse `(index, value)` lists.
    pub fn add_outer<R>(&mut self, coef: f64, rows: R, cols: &[(usize, f64)])
    where
        R: IntoIterator<Item = (usize, f64)>,
    {
        let c = coef / self.scale;
        let d = self.d;
        for (i, ri) in rows {
            if ri == 0.0 {
                continue;
            }
            if !self.row_active[i] {
                self.row_active[i] = true;
                self.active_rows.push(i);
            }
            let cr = c * ri;
            let row = &mut self.data.as_mut_slice()[i * d..(i + 1) * d];
            for &(j, cj) in cols {
                let old = row[j];
                let new = old + cr * cj;
                row[j] = new;
                self.sumsq += new * new - old * old;
            }
        }
    }

    /// `||M||_F^2`.
    #[inline]
    pub fn frobenius_sq(&self) -> f64 {
        (self.scale * self.scale * self.sumsq).max(0.0)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.scale * self.data[(i, j)]
    }

    /// `M v` into `out`.
    pub fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for &i in &self.active_rows {
            out[i] = self.scale * kernels::dot(self.data.row(i), v);
        }
    }

    /// `(M v1, M v2)` in one pass.
    pub fn mul_vec2_into(&self, v1: &[f64], v2: &[f64], out1: &mut [f64], out2: &mut [f64]) {
        out1.iter_mut().for_each(|x| *x = 0.0);
        out2.iter_mut().for_each(|x| *x = 0.0);
        for &i in &self.active_rows {
            let (a, b) = kernels::dot2(self.data.row(i), v1, v2);
            out1[i] = self.scale * a;
            out2[i] = self.scale * b;
        }
    }

    /// `M^T v` into `out`.
    pub fn tr_mul_vec_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for &i in &self.active_rows {
            let vi = v[i];
            if vi != 0.0 {
                kernels::axpy(self.scale * vi, self.data.row(i), out);
            }
        }
    }

    /// `v^T M v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &i in &self.active_rows {
            let vi = v[i];
            if vi != 0.0 {
                acc += vi * kernels::dot(self.data.row(i), v);
            }
        }
        self.scale * acc
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = self.data.clone();
        m.scale(self.scale);
        m
    }

    pub fn is_finite(&self) -> bool {
        self.scale.is_finite() && self.sumsq.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ema_rank1_update, EmaWeight};

    #[test]
    fn lazy_decay_matches_dense_ema() {
        let d = 6;
        let mut lazy = EmaMatrix::zeros(d);
        let mut dense = DenseMatrix::zeros(d, d);
        let mut state = 7u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for t in 1..=400u64 {
            let beta = if t % 2 == 0 { 0.05 } else { 1.0 / t as f64 };
            let rows: Vec<(usize, f64)> = (0..d).filter(|i| (i + t as usize) % 3 != 0).map(|i| (i, next())).collect();
            let cols: Vec<(usize, f64)> = vec![((t as usize) % d, 1.0), ((t as usize + 2) % d, -0.7)];
            let mut u = vec![0.0; d];
            let mut v = vec![0.0; d];
            rows.iter().for_each(|&(i, x)| u[i] = x);
            cols.iter().for_each(|&(j, x)| v[j] += x);
            ema_rank1_update(&mut dense, EmaWeight::new(beta).unwrap(), &u, &v).unwrap();
            lazy.decay(beta);
            lazy.add_outer(beta, rows.iter().copied(), &cols);
        }
        assert!(lazy.to_dense().max_abs_diff(&dense) < 1e-12);
        assert!((lazy.frobenius_sq() - dense.frobenius_sq()).abs() < 1e-9 * (1.0 + dense.frobenius_sq()));
        let v: Vec<f64> = (0..d).map(|i| i as f64 - 2.5).collect();
        let mut out = vec![0.0; d];
        lazy.mul_vec_into(&v, &mut out);
        let expect = dense.mul_vec(&v);
        for (a, b) in out.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        lazy.tr_mul_vec_into(&v, &mut out);
        let expect = dense.tr_mul_vec(&v);
        for (a, b) in out.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((lazy.quad_form(&v) - dense.quad_form(&v)).abs() < 1e-10);
    }

    #[test]
    fn refold_keeps_value() {
        let mut m = EmaMatrix::zeros(2);
        m.add_outer(1.0, [(0, 1.0)], &[(1, 2.0)]);
        for _ in 0..200 {
            m.decay(0.5);
            m.add_outer(0.5, [(1, 1.0)], &[(0, 1.0)]);
        }
        assert!((m.get(1, 0) - 1.0).abs() < 1e-12);
        assert!(m.get(0, 1).abs() < 1e-50);
        assert!((m.frobenius_sq() - 1.0).abs() < 1e-9);
    }
}
