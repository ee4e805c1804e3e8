mod common;

use common::*;
use hopca::sparse::{lasso_cd, sparse_cp_tpa_objective, sparse_pca, soft_threshold_vec, BicContext};
use hopca::*;
use proptest::prelude::*;

fn support(v: &Vector) -> Vec<usize> {
    (0..v.len()).filter(|&i| v[i] != 0.0).collect()
}

fn sparse_rank_one(seed: u64, d: f64) -> (Tensor3, Vector, Vector, Vector) {
    let mut g = rng(seed);
    let u = sparse_unit(&mut g, 20, &(0..20).step_by(2).collect::<Vec<_>>());
    let v = unit_vec(&mut g, 8);
    let w = unit_vec(&mut g, 6);
    (rank_one(d, &u, &v, &w), u, v, w)
}

#[test]
fn zero_lambda_matches_tpa() {
    let x = gaussian_tensor(&mut rng(1), [6, 5, 4]);
    let cfg = SolverConfig::default();
    let a = sparse_cp_tpa_rank_one(&x, [0.0; 3], &cfg).unwrap();
    let b = tpa_rank_one(&x, &cfg).unwrap();
    assert_eq!((a.u, a.v, a.w, a.d), (b.u, b.v, b.w, b.d));
    let (m, _) = sparse_cp_tpa(&x, 3, &PenaltySpec::none(), &cfg).unwrap();
    let (t, _) = tpa(&x, 3, &cfg).unwrap();
    assert_eq!(m, t);
}

#[test]
fn full_threshold_zeroes_component() {
    let x = gaussian_tensor(&mut rng(2), [6, 5, 4]);
    let lam = 1e6;
    let r = sparse_cp_tpa_rank_one(&x, [lam, 0.0, 0.0], &SolverConfig::default()).unwrap();
    assert_eq!(r.d, 0.0);
    assert!(r.u.iter().all(|v| *v == 0.0));
}

#[test]
fn noiseless_sparse_support_recovered() {
    let (x, u, _, _) = sparse_rank_one(3, 100.0);
    let r = sparse_cp_tpa_rank_one(&x, [1.0, 0.0, 0.0], &SolverConfig::default()).unwrap();
    assert_eq!(support(&r.u), support(&u));
}

#[test]
fn two_component_supports_recovered() {
    let mut g = rng(4);
    let u1 = sparse_unit(&mut g, 30, &(0..10).collect::<Vec<_>>());
    let u2 = sparse_unit(&mut g, 30, &(15..25).collect::<Vec<_>>());
    let f = |g: &mut _, n| hopca::linalg::leading_left_singular(&gaussian_matrix(g, n, n), 2).vectors;
    let (v, w) = (f(&mut g, 8), f(&mut g, 7));
    let truth = CpModel::new(Matrix::from_columns(&[u1, u2]), v, w, vec![200.0, 100.0]).unwrap();
    let x = truth.reconstruct();
    let pen = PenaltySpec::lasso([0.5, 0.0, 0.0]);
    let (m, _) = sparse_cp_tpa(&x, 2, &pen, &SolverConfig::default().with_tol(1e-10)).unwrap();
    let metrics = support_metrics(&m, &truth).unwrap();
    for r in &metrics.rates {
        assert_eq!(r[0].tp, 1.0);
        assert_eq!(r[0].fp, 0.0);
    }
}

#[test]
fn surplus_component_on_rank_two_is_negligible() {
    let mut g = rng(5);
    let f = |g: &mut _, n| hopca::linalg::leading_left_singular(&gaussian_matrix(g, n, n), 2).vectors;
    let truth = CpModel::new(f(&mut g, 9), f(&mut g, 8), f(&mut g, 7), vec![200.0, 100.0]).unwrap();
    let x = truth.reconstruct();
    let (m, _) = sparse_cp_tpa(&x, 3, &PenaltySpec::lasso([0.1; 3]), &SolverConfig::default().with_tol(1e-10)).unwrap();
    assert!(m.d[2] <= 1e-6 * m.d[0], "{:?}", m.d);
}

#[test]
fn bic_default_finds_sparse_support() {
    let (mut x, u, _, _) = sparse_rank_one(6, 60.0);
    x.add_assign(&{
        let mut e = gaussian_tensor(&mut rng(7), x.dims());
        e.scale(0.1);
        e
    });
    let (m, diag) = sparse_cp_tpa(&x, 1, &PenaltySpec::lasso_bic_on([true, false, false]), &SolverConfig::default()).unwrap();
    assert_eq!(support(&m.u.column(0).into_owned()), support(&u));
    assert!(diag.components[0].lambdas[0] > 0.0);
}

#[test]
fn sparse_cp_als_reductions() {
    let (x, _, _, _) = sparse_rank_one(8, 100.0);
    let cfg = SolverConfig::default().with_tol(1e-10);
    let (a, _) = sparse_cp_als(&x, 1, &PenaltySpec::lasso([0.0; 3]), &cfg).unwrap();
    let (b, _) = cp_als(&x, 1, &cfg).unwrap();
    assert!((a.d[0] - b.d[0]).abs() < 1e-6);
    for m in Mode::ALL {
        assert!((a.factor(m) - b.factor(m)).amax() < 1e-6);
    }
    let (z, _) = sparse_cp_als(&x, 1, &PenaltySpec::lasso([1e6; 3]), &cfg).unwrap();
    assert_eq!(z.d, vec![0.0]);
    assert!(z.u.iter().all(|v| *v == 0.0));
}

#[test]
fn sparse_pca_recovers_sparse_left_vector() {
    let mut g = rng(9);
    let a = sparse_unit(&mut g, 12, &[0, 3, 4, 7, 8, 11]);
    let b = unit_vec(&mut g, 9);
    let m = 10.0 * &a * b.transpose();
    let pc = sparse_pca_rank_one(&m, 0.1, 0.0, &SolverConfig::default()).unwrap();
    assert_eq!(support(&pc.u), support(&a));
    let huge = m.amax() * m.ncols() as f64;
    assert_eq!(sparse_pca_rank_one(&m, huge, 0.0, &SolverConfig::default()).unwrap().d, 0.0);
}

#[test]
fn sparse_pca_deflation_subtracts_fitted_term() {
    let mut g = rng(10);
    let m = gaussian_matrix(&mut g, 6, 5);
    let ctx = BicContext { extra_sq: 0.0, n_elems: 30.0 };
    let (u, pcs) = sparse_pca(&m, 2, &ModePenalty::none(), 0.0, &SolverConfig::default().with_tol(1e-12), ctx);
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    assert!((pcs[0].d - s[0]).abs() < 1e-8 && (pcs[1].d - s[1]).abs() < 1e-8);
    assert!(u.column(0).dot(&u.column(1)).abs() < 1e-6);
}

#[test]
fn sparse_hosvd_reductions_and_zeroing() {
    let x = gaussian_tensor(&mut rng(11), [5, 6, 4]);
    let cfg = SolverConfig::default().with_tol(1e-12).with_max_iter(5000);
    let (s, _) = sparse_hosvd(&x, [2, 2, 2], &PenaltySpec::lasso([0.0; 3]), &cfg).unwrap();
    let (h, _) = hosvd(&x, [2, 2, 2]).unwrap();
    for m in Mode::ALL {
        // same subspace: singular values of the cross Gram are all one
        let cross = s.factor(m).transpose() * h.factor(m);
        let sv = cross.singular_values();
        assert!(sv.iter().all(|c| (c - 1.0).abs() < 1e-6), "{sv}");
    }
    let (z, _) = sparse_hosvd(&x, [2, 2, 2], &PenaltySpec::lasso([1e6, 0.0, 0.0]), &cfg).unwrap();
    assert!(z.u.iter().all(|v| *v == 0.0));
    assert!(z.core.is_zero());
}

#[test]
fn sparse_hooi_rank_one_reduction_and_zeroing() {
    let x = gaussian_tensor(&mut rng(12), [5, 6, 4]);
    let cfg = SolverConfig::default().with_tol(1e-12).with_max_iter(5000);
    let (s, _) = sparse_hooi(&x, [1, 1, 1], &PenaltySpec::lasso([0.0; 3]), &cfg).unwrap();
    let (h, _) = hooi(&x, [1, 1, 1], &cfg).unwrap();
    assert!((s.core.get(0, 0, 0).abs() - h.core.get(0, 0, 0).abs()).abs() < 1e-6);
    for m in Mode::ALL {
        assert!((s.factor(m).column(0).dot(&h.factor(m).column(0)).abs() - 1.0).abs() < 1e-6);
    }
    let (z, _) = sparse_hooi(&x, [1, 1, 1], &PenaltySpec::lasso([1e6; 3]), &cfg).unwrap();
    assert!(z.u.iter().all(|v| *v == 0.0));
}

#[test]
fn sparse_hooi_scenario_three_supports() {
    let mut g = rng(13);
    let sup = |n: usize| (0..n).step_by(2).collect::<Vec<_>>();
    let (u, v, w) = (sparse_unit(&mut g, 24, &sup(24)), sparse_unit(&mut g, 20, &sup(20)), sparse_unit(&mut g, 16, &sup(16)));
    let mut x = rank_one(100.0, &u, &v, &w);
    let mut e = gaussian_tensor(&mut g, x.dims());
    e.scale(0.2);
    x.add_assign(&e);
    let (t, _) = sparse_hooi(&x, [1, 1, 1], &PenaltySpec::lasso([1.0; 3]), &SolverConfig::default()).unwrap();
    for (est, truth) in [(&t.u, &u), (&t.v, &v), (&t.w, &w)] {
        assert_eq!(support(&est.column(0).into_owned()), support(truth));
    }
}

#[test]
fn soft_threshold_is_l1_prox_by_grid_search() {
    for &y in &[-2.3, -0.4, 0.0, 0.7, 1.9] {
        for &lam in &[0.0, 0.5, 1.0] {
            let s = soft_threshold(y, lam);
            let obj = |z: f64| 0.5 * (y - z) * (y - z) + lam * z.abs();
            let best = (-40_000..=40_000).map(|i| i as f64 * 1e-4).map(obj).fold(f64::INFINITY, f64::min);
            assert!(obj(s) <= best + 1e-12, "y={y} lam={lam}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn penalized_objective_non_decreasing(seed in 0u64..10_000, frac in prop::sample::select(vec![0.0, 0.1, 0.3, 0.5])) {
        let x = gaussian_tensor(&mut rng(seed), [7, 6, 5]);
        let r = sparse_cp_tpa_rank_one(&x, [frac * 2.0; 3], &SolverConfig::default()).unwrap();
        prop_assert!(r.record.trace.windows(2).all(|w| w[1] >= w[0] - 1e-10));
        let f = [r.u.clone(), r.v.clone(), r.w.clone()];
        if !r.is_zero() {
            let last = sparse_cp_tpa_objective(&x, &f, [PenaltyKind::Lasso; 3], [frac * 2.0; 3]);
            prop_assert!(last >= r.record.trace[0] - 1e-10);
        }
    }

    #[test]
    fn factors_unit_or_zero(seed in 0u64..10_000, lam in 0.0f64..3.0) {
        let x = gaussian_tensor(&mut rng(seed), [6, 5, 4]);
        let (m, _) = sparse_cp_tpa(&x, 2, &PenaltySpec::lasso([lam; 3]), &SolverConfig::default()).unwrap();
        prop_assert!(m.columns_unit_or_zero(1e-10));
    }

    #[test]
    fn sparsity_path_monotone_in_lambda(seed in 0u64..10_000) {
        let mut g = rng(seed);
        let c = gaussian_vec(&mut g, 30);
        let mut prev = usize::MAX;
        for i in 0..40 {
            let nnz = soft_threshold_vec(&c, i as f64 * 0.1).iter().filter(|v| **v != 0.0).count();
            prop_assert!(nnz <= prev);
            prev = nnz;
        }
    }

    #[test]
    fn lasso_cd_satisfies_kkt(seed in 0u64..10_000, lam in 0.0f64..2.0) {
        let mut g = rng(seed);
        let a = gaussian_matrix(&mut g, 8, 4);
        let gram = a.transpose() * &a;
        let b = gaussian_vec(&mut g, 4);
        let z = lasso_cd(&gram, b.as_slice(), lam, false, None, 1e-12);
        let grad = &gram * &z - &b;
        for i in 0..4 {
            if z[i] == 0.0 {
                prop_assert!(grad[i].abs() <= lam + 1e-8);
            } else {
                prop_assert!((grad[i] + lam * z[i].signum()).abs() <= 1e-8);
            }
        }
    }
}
