//! Slice kernels shared by the dense and sparse code paths.

/// Dot product with independent partial sums so the loop vectorizes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    acc.iter().sum::<f64>() + tail
}

/// Two dot products against the same left operand in one pass.
#[inline]
pub fn dot2(a: &[f64], b: &[f64], c: &[f64]) -> (f64, f64) {
    debug_assert!(a.len() == b.len() && a.len() == c.len());
    let n = a.len().min(b.len()).min(c.len());
    let (a, b, c) = (&a[..n], &b[..n], &c[..n]);
    let mut acc_b = [0.0f64; 4];
    let mut acc_c = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let cc = c.chunks_exact(4);
    let (ra, rb, rc) = (ca.remainder(), cb.remainder(), cc.remainder());
    for ((x, y), z) in ca.zip(cb).zip(cc) {
        for k in 0..4 {
            acc_b[k] += x[k] * y[k];
            acc_c[k] += x[k] * z[k];
        }
    }
    let (mut tb, mut tc) = (0.0, 0.0);
    for ((x, y), z) in ra.iter().zip(rb).zip(rc) {
        tb += x * y;
        tc += x * z;
    }
    (acc_b.iter().sum::<f64>() + tb, acc_c.iter().sum::<f64>() + tc)
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `y = keep * y + add * x`.
#[inline]
pub fn ema_axpy(keep: f64, add: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = keep * *yi + add * xi;
    }
}

#[inline]
pub fn sum_at(v: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| v[i]).sum()
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive_for_ragged_lengths() {
        for n in [0usize, 1, 3, 7, 8, 9, 17, 64, 65] {
            let a: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let b: Vec<f64> = (0..n).map(|i| (i as f64 * 1.3).cos()).collect();
            let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            assert!((dot(&a, &b) - naive).abs() < 1e-12);
            let c: Vec<f64> = b.iter().map(|x| x * 2.0 - 1.0).collect();
            let naive_c: f64 = a.iter().zip(&c).map(|(x, y)| x * y).sum();
            let (db, dc) = dot2(&a, &b, &c);
            assert!((db - naive).abs() < 1e-12);
            assert!((dc - naive_c).abs() < 1e-12);
        }
    }
}
