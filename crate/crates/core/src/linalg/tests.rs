use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn from_na(m: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn random_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-scale..scale)).collect()
}

/// `I + noise`, diagonally dominant so the inverse is well conditioned.
fn well_conditioned(rng: &mut ChaCha8Rng, d: usize, noise: f64) -> DenseMatrix {
    DenseMatrix::from_fn(d, d, |i, j| {
        let e = rng.random_range(-noise..noise);
        if i == j {
            1.0 + e
        } else {
            e / d as f64
        }
    })
}

fn weight(b: f64) -> EmaWeight {
    EmaWeight::new(b).unwrap()
}

#[test]
fn ema_weight_rejects_out_of_range() {
    assert!(EmaWeight::new(0.0).is_err());
    assert!(EmaWeight::new(-0.1).is_err());
    assert!(EmaWeight::new(1.5).is_err());
    assert!(EmaWeight::new(1.0).is_ok());
    assert_eq!(EmaWeight::harmonic(4).get(), 0.25);
}

#[test]
fn ema_rank1_from_zero() {
    let mut m = DenseMatrix::zeros(2, 2);
    ema_rank1_update(&mut m, weight(0.5), &[1.0, 0.0], &[1.0, 0.0]).unwrap();
    assert_eq!(m.as_slice(), &[0.5, 0.0, 0.0, 0.0]);
}

#[test]
fn ema_rank1_full_replacement() {
    let mut m = DenseMatrix::from_row_major(2, 2, vec![3.0, -1.0, 2.0, 7.0]);
    let u = [2.0, -1.0];
    let v = [0.5, 4.0];
    ema_rank1_update(&mut m, weight(1.0), &u, &v).unwrap();
    assert_eq!(m.as_slice(), &[1.0, 8.0, -0.5, -4.0]);
}

#[test]
fn ema_rank1_dimension_mismatch() {
    let mut m = DenseMatrix::zeros(3, 3);
    assert!(matches!(
        ema_rank1_update(&mut m, weight(0.5), &[1.0, 0.0], &[1.0, 0.0, 0.0]),
        Err(LinalgError::DimensionMismatch(_))
    ));
}

#[test]
fn ema_rank1_matches_unrolled_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let d = 4;
    let beta = 0.17;
    let m0 = DenseMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let pairs: Vec<(Vec<f64>, Vec<f64>)> =
        (0..10).map(|_| (random_vec(&mut rng, d, 1.0), random_vec(&mut rng, d, 1.0))).collect();
    let mut m = m0.clone();
    for (u, v) in &pairs {
        ema_rank1_update(&mut m, weight(beta), u, v).unwrap();
    }
    // sum_k (1-beta)^(9-k) beta u_k v_k^T + (1-beta)^10 M0
    let mut expect = to_na(&m0) * (1.0 - beta).powi(10);
    for (k, (u, v)) in pairs.iter().enumerate() {
        let uv = DVector::from_column_slice(u) * DVector::from_column_slice(v).transpose();
        expect += uv * (beta * (1.0 - beta).powi(9 - k as i32));
    }
    assert!(m.max_abs_diff(&from_na(&expect)) < 1e-12);
}

#[test]
fn sherman_morrison_zero_update_rescales() {
    let a_inv = DenseMatrix::from_row_major(2, 2, vec![2.0, 1.0, 0.5, 3.0]);
    let out = sherman_morrison_ema(&a_inv, weight(0.2), &[0.0, 0.0], &[1.0, -2.0]).unwrap();
    let mut expect = a_inv.clone();
    expect.scale(1.0 / 0.8);
    assert!(out.max_abs_diff(&expect) < 1e-15);
}

fn direct_ema_inverse(a: &DMatrix<f64>, beta: f64, u: &[f64], v: &[f64]) -> DMatrix<f64> {
    let next = a * (1.0 - beta)
        + DVector::from_column_slice(u) * DVector::from_column_slice(v).transpose() * beta;
    next.try_inverse().expect("oracle matrix invertible")
}

#[test]
fn sherman_morrison_identity_against_direct_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let u = random_vec(&mut rng, 3, 1.0);
        let v = random_vec(&mut rng, 3, 1.0);
        let out = sherman_morrison_ema(&DenseMatrix::identity(3), weight(0.1), &u, &v).unwrap();
        let expect = direct_ema_inverse(&DMatrix::identity(3, 3), 0.1, &u, &v);
        assert!(out.max_abs_diff(&from_na(&expect)) < 1e-10);
    }
}

/// The plus-sign variant of the update (as sometimes printed) is not the inverse.
#[test]
fn sherman_morrison_sign_is_subtraction() {
    let a_inv = DenseMatrix::identity(2);
    let (beta, u, v) = (0.3, [1.0, 0.5], [0.25, 1.0]);
    let out = sherman_morrison_ema(&a_inv, weight(beta), &u, &v).unwrap();
    let expect = from_na(&direct_ema_inverse(&DMatrix::identity(2, 2), beta, &u, &v));
    assert!(out.max_abs_diff(&expect) < 1e-12);
    let vu = v[0] * u[0] + v[1] * u[1];
    let c = (beta / (1.0 - beta)) / ((1.0 - beta) + beta * vu);
    let plus = DenseMatrix::from_fn(2, 2, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id / (1.0 - beta) + c * u[i] * v[j]
    });
    assert!(plus.max_abs_diff(&expect) > 1e-2);
}

#[test]
fn sherman_morrison_chained_tracks_direct_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = 5;
    let beta = 0.05;
    let mut a = to_na(&well_conditioned(&mut rng, d, 0.3));
    let mut a_inv = from_na(&a.clone().try_inverse().unwrap());
    for _ in 0..50 {
        // Keep the running matrix near-diagonal: u close to v.
        let v = random_vec(&mut rng, d, 1.0);
        let u: Vec<f64> = v.iter().map(|x| x + rng.random_range(-0.1..0.1)).collect();
        sherman_morrison_ema_in_place(&mut a_inv, weight(beta), &u, &v).unwrap();
        a = &a * (1.0 - beta)
            + DVector::from_column_slice(&u) * DVector::from_column_slice(&v).transpose() * beta;
        let direct = from_na(&a.clone().try_inverse().unwrap());
        assert!(a_inv.max_abs_diff(&direct) < 1e-8);
    }
}

#[test]
fn sherman_morrison_rejects_full_replacement_and_singular() {
    let a_inv = DenseMatrix::identity(2);
    assert_eq!(
        sherman_morrison_ema(&a_inv, weight(1.0), &[1.0, 0.0], &[1.0, 0.0]),
        Err(LinalgError::FullReplacement)
    );
    // (1-beta) + beta v^T u == 0 with beta = 0.5 and v^T u = -1.
    let err = sherman_morrison_ema(&a_inv, weight(0.5), &[1.0, 0.0], &[-1.0, 0.0]).unwrap_err();
    assert!(matches!(err, LinalgError::SingularUpdate(_)));
}

#[test]
fn adaptive_stepsize_examples() {
    assert_eq!(adaptive_stepsize(&DenseMatrix::zeros(2, 2), &[0.0, 0.0]), 0.01);
    // ||A||_F^2 = 9, ||x||^2 = 1
    let a = DenseMatrix::scaled_identity(1, 3.0);
    assert!((adaptive_stepsize(&a, &[1.0]) - 0.001).abs() < 1e-15);
    // ||A||_F^2 = 99 * ||x||^2 = 1
    assert!((stepsize_from_norms(99.0, 1.0) - 1e-4).abs() < 1e-18);
    assert!((stepsize_from_norms(33.0, 3.0) - 1e-4).abs() < 1e-18);
}

#[test]
fn approx_inverse_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = well_conditioned(&mut rng, 4, 0.4);
    let mut b = from_na(&to_na(&a).transpose().try_inverse().unwrap());
    let before = b.clone();
    let x = random_vec(&mut rng, 4, 1.0);
    approx_inverse_step(&mut b, &a, &x, 0.3).unwrap();
    assert!(b.max_abs_diff(&before) < 1e-12);
}

#[test]
fn approx_inverse_hand_expanded() {
    let a = DenseMatrix::identity(3);
    let mut b = DenseMatrix::zeros(3, 3);
    approx_inverse_step(&mut b, &a, &[1.0, 0.0, 0.0], 0.5).unwrap();
    let mut expect = DenseMatrix::zeros(3, 3);
    expect[(0, 0)] = 0.5;
    assert_eq!(b, expect);
}

#[test]
fn approx_inverse_rejects_nonpositive_alpha() {
    let a = DenseMatrix::identity(2);
    let mut b = DenseMatrix::identity(2);
    assert!(approx_inverse_step(&mut b, &a, &[1.0, 0.0], 0.0).is_err());
}

#[test]
fn approx_inverse_basis_sweeps_converge_monotonically() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let d = 8;
    let a = well_conditioned(&mut rng, d, 0.5);
    let a_na = to_na(&a);
    let alpha = 1.0 / a.frobenius_sq();
    let mut b = DenseMatrix::zeros(d, d);
    let err = |b: &DenseMatrix| (a_na.transpose() * to_na(b) - DMatrix::identity(d, d)).norm();
    let mut last = err(&b);
    for sweep in 0..4000 {
        for k in 0..d {
            approx_inverse_step(&mut b, &a, &DenseVector::basis(d, k), alpha).unwrap();
            let e = err(&b);
            assert!(e <= last + 1e-12, "sweep {sweep}: {e} > {last}");
            last = e;
        }
        if last < 1e-4 {
            break;
        }
    }
    assert!(last < 1e-4, "residual {last}");
    let direct = from_na(&a_na.transpose().try_inverse().unwrap());
    assert!(b.max_abs_diff(&direct) < 1e-4);
}

#[test]
fn preconditioned_step_fixed_point_and_exact_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = well_conditioned(&mut rng, 5, 0.3);
    let w = random_vec(&mut rng, 5, 1.0);
    let b = a.mul_vec(&w);
    let bm = DenseMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
    let next = preconditioned_solve_step(&w, &bm, &a, &b, 1e-4).unwrap();
    assert!(next.iter().zip(&w).all(|(p, q)| (p - q).abs() <= 1e-12));

    let b = [1.0, -2.0, 0.5];
    let next = preconditioned_solve_step(&[0.0; 3], &DenseMatrix::identity(3), &DenseMatrix::identity(3), &b, 0.0)
        .unwrap();
    assert_eq!(next.as_slice(), &b);
}

#[test]
fn preconditioned_iteration_converges_with_learned_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let d = 6;
    let a = well_conditioned(&mut rng, d, 0.6);
    let target = random_vec(&mut rng, d, 2.0);
    let b = a.mul_vec(&target);
    let mut bm = DenseMatrix::identity(d);
    let mut w = DenseVector::zeros(d);
    let alpha = 1.0 / a.frobenius_sq();
    for t in 0..3000 {
        approx_inverse_step(&mut bm, &a, &DenseVector::basis(d, t % d), alpha).unwrap();
        w = preconditioned_solve_step(&w, &bm, &a, &b, 1e-4).unwrap();
    }
    let direct = to_na(&a).lu().solve(&DVector::from_column_slice(&b)).unwrap();
    for (wi, di) in w.iter().zip(direct.iter()) {
        assert!((wi - di).abs() < 1e-6, "{wi} vs {di}");
    }
}

#[test]
fn cg_identity_system() {
    let out = conjugate_gradient(&DenseMatrix::identity(3), &[1.0, 0.0, 0.0], &[0.0; 3], 0.0, 1e-3, None).unwrap();
    assert!(out.converged);
    assert!((out.w[0] - 1.0).abs() < 1e-12 && out.w[1].abs() < 1e-12 && out.w[2].abs() < 1e-12);
}

#[test]
fn cg_warm_start_at_solution_returns_immediately() {
    let a = DenseMatrix::from_row_major(2, 2, vec![2.0, 0.0, 1.0, 3.0]);
    let w = [0.5, -1.0];
    // b = (A^T A + eta I) w
    let eta = 0.1;
    let aw = a.mul_vec(&w);
    let mut b = a.tr_mul_vec(&aw).into_inner();
    b.iter_mut().zip(&w).for_each(|(bi, wi)| *bi += eta * wi);
    let out = conjugate_gradient(&a, &b, &w, eta, 1e-3, None).unwrap();
    assert_eq!(out.iterations, 0);
    assert_eq!(out.w.as_slice(), &w);
}

#[test]
fn cg_matches_direct_tikhonov_solve_within_tol_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let d = 5;
    let eta = 1e-4;
    let tol = DEFAULT_CG_TOL;
    for _ in 0..20 {
        let a = well_conditioned(&mut rng, d, 0.8);
        let b = random_vec(&mut rng, d, 1.0);
        let out = conjugate_gradient(&a, &b, &[0.0; 5], eta, tol, None).unwrap();
        assert!(out.converged);
        let na = to_na(&a);
        let sym = na.transpose() * &na + DMatrix::identity(d, d) * eta;
        let direct = sym.clone().lu().solve(&DVector::from_column_slice(&b)).unwrap();
        // ||w - w*|| <= ||r|| / lambda_min
        let lambda_min = sym.symmetric_eigenvalues().min();
        let bound = tol.sqrt() / lambda_min;
        let err = (DVector::from_column_slice(&out.w) - direct).norm();
        assert!(err <= bound, "{err} > {bound}");
    }
}

#[test]
fn cg_rejects_bad_arguments() {
    let a = DenseMatrix::identity(2);
    assert!(conjugate_gradient(&a, &[1.0], &[0.0, 0.0], 0.0, 1e-3, None).is_err());
    assert!(conjugate_gradient(&a, &[1.0, 0.0], &[0.0, 0.0], 0.0, 0.0, None).is_err());
    assert!(matches!(
        conjugate_gradient(&a, &[f64::NAN, 0.0], &[0.0, 0.0], 0.0, 1e-3, None),
        Err(LinalgError::NonFinite(_))
    ));
}

proptest! {
    #[test]
    fn harmonic_ema_is_plain_average(seed in 0u64..10_000, t_max in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 3;
        let mut m = DenseMatrix::from_fn(d, d, |_, _| rng.random_range(-5.0..5.0));
        let mut sum = DMatrix::<f64>::zeros(d, d);
        for t in 1..=t_max {
            let u = random_vec(&mut rng, d, 1.0);
            let v = random_vec(&mut rng, d, 1.0);
            ema_rank1_update(&mut m, EmaWeight::harmonic(t as u64), &u, &v).unwrap();
            sum += DVector::from_column_slice(&u) * DVector::from_column_slice(&v).transpose();
        }
        let avg = from_na(&(sum / t_max as f64));
        prop_assert!(m.max_abs_diff(&avg) < 1e-10);
    }

    #[test]
    fn chained_sherman_morrison_matches_direct(seed in 0u64..10_000, steps in 1usize..100, d in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beta = rng.random_range(0.01..0.2);
        let mut a = to_na(&well_conditioned(&mut rng, d, 0.3));
        let mut a_inv = from_na(&a.clone().try_inverse().unwrap());
        for _ in 0..steps {
            let v = random_vec(&mut rng, d, 1.0);
            let u: Vec<f64> = v.iter().map(|x| x + rng.random_range(-0.05..0.05)).collect();
            sherman_morrison_ema_in_place(&mut a_inv, EmaWeight::new(beta).unwrap(), &u, &v).unwrap();
            a = &a * (1.0 - beta)
                + DVector::from_column_slice(&u) * DVector::from_column_slice(&v).transpose() * beta;
        }
        let direct = from_na(&a.try_inverse().unwrap());
        prop_assert!(a_inv.max_abs_diff(&direct) < 1e-8);
    }

    #[test]
    fn adaptive_step_never_increases_residual(seed in 0u64..10_000, d in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DenseMatrix::from_fn(d, d, |_, _| rng.random_range(-3.0..3.0));
        let mut b = DenseMatrix::from_fn(d, d, |_, _| rng.random_range(-3.0..3.0));
        let x = random_vec(&mut rng, d, 2.0);
        let resid = |b: &DenseMatrix| {
            let bx = b.mul_vec(&x);
            let mut r = a.tr_mul_vec(&bx);
            r.iter_mut().zip(&x).for_each(|(ri, xi)| *ri -= xi);
            r.norm_sq().sqrt()
        };
        let before = resid(&b);
        let alpha = adaptive_stepsize(&a, &x);
        approx_inverse_step(&mut b, &a, &x, alpha).unwrap();
        prop_assert!(resid(&b) <= before * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn preconditioned_step_keeps_exact_solution(seed in 0u64..10_000, d in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DenseMatrix::from_fn(d, d, |_, _| rng.random_range(-2.0..2.0));
        let bm = DenseMatrix::from_fn(d, d, |_, _| rng.random_range(-2.0..2.0));
        let w = random_vec(&mut rng, d, 3.0);
        let b = a.mul_vec(&w);
        let next = preconditioned_solve_step(&w, &bm, &a, &b, 1e-4).unwrap();
        let diff: f64 = next.iter().zip(&w).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-12);
    }

    #[test]
    fn cg_converges_within_n_iterations(seed in 0u64..10_000, d in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = well_conditioned(&mut rng, d, 0.5);
        let b = random_vec(&mut rng, d, 1.0);
        let out = conjugate_gradient(&a, &b, &vec![0.0; d], 0.1, 1e-10, Some(d)).unwrap();
        prop_assert!(out.converged, "residual {} after {} iterations", out.residual_sq, out.iterations);
    }
}
