mod common;

use common::*;
use hopca::metrics::{naive_threshold, roc_sweep, support_rates, Rates};
use hopca::sim::default_roc_grid;
use hopca::select::{bic_from_contraction, bic_score, default_grid, log_grid};
use hopca::*;
use proptest::prelude::*;

fn orthonormal(seed: u64, n: usize, k: usize) -> Matrix {
    hopca::linalg::leading_left_singular(&gaussian_matrix(&mut rng(seed), n, n), k).vectors
}

#[test]
fn variance_of_exact_orthogonal_model() {
    let (u, v, w) = (orthonormal(1, 6, 2), orthonormal(2, 5, 2), orthonormal(3, 4, 2));
    let m = CpModel::new(u, v, w, vec![3.0, 4.0]).unwrap();
    let x = m.reconstruct();
    let rep = cp_variance_explained(&x, &m, 2).unwrap();
    assert!((rep.cumulative[0] - 9.0 / 25.0).abs() < 1e-12);
    assert!((rep.cumulative[1] - 1.0).abs() < 1e-12);
}

#[test]
fn variance_projection_matches_pseudo_inverse_form() {
    let mut g = rng(4);
    let x = gaussian_tensor(&mut g, [6, 5, 4]);
    let f = [gaussian_matrix(&mut g, 6, 3), gaussian_matrix(&mut g, 5, 3), gaussian_matrix(&mut g, 4, 3)];
    let rep = variance_explained(&x, [&f[0], &f[1], &f[2]], 3).unwrap();
    for k in 1..=3 {
        let p: Vec<Matrix> = f.iter().map(|m| projection_matrix(&m.columns(0, k).into_owned())).collect();
        for (i, mode) in Mode::ALL.iter().enumerate() {
            assert!((rep.projection(k, *mode) - &p[i]).amax() < 1e-10);
        }
        let proj = project_dense(&x, [&p[0], &p[1], &p[2]]);
        let want = proj.frob_norm().powi(2) / x.frob_norm().powi(2);
        assert!((rep.cumulative[k - 1] - want).abs() < 1e-12);
    }
    assert!(rep.cumulative.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}

#[test]
fn bic_score_closed_form() {
    let s = bic_score(2.0, 10.0, 100.0, 3);
    assert!((s - ((0.02f64).ln() + 100f64.ln() / 100.0 * 3.0)).abs() < 1e-15);
    // exact fits are floored, not infinite
    assert!(bic_score(0.0, 10.0, 100.0, 3).is_finite());
}

#[test]
fn log_grid_shape() {
    let g = log_grid(5.0, 50, 1e-3);
    assert_eq!(g.len(), 50);
    assert!((g[0] - 5e-3).abs() < 1e-15 && g[49] == 5.0);
    assert!(g.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(log_grid(5.0, 1, 1e-3), vec![5.0]);
    assert_eq!(default_grid(5.0), g);
}

#[test]
fn bic_contraction_oracle() {
    let c = [3.0, 0.05, -0.04, 2.0];
    let grid = [0.0, 0.1, 2.5, 4.0];
    let (total, n) = (14.0, 64.0);
    let sel = bic_from_contraction(&c, PenaltyKind::Lasso, total, n, &grid);
    // λ=0.1 keeps two entries: u ∝ (2.9, 1.9)
    let d = (2.9f64 * 3.0 + 1.9 * 2.0) / (2.9f64.powi(2) + 1.9f64.powi(2)).sqrt();
    let want = ((total - d * d) / n).ln() + n.ln() / n * 2.0;
    assert!((sel.points[1].bic - want).abs() < 1e-12);
    assert_eq!(sel.points[1].nnz, 2);
    assert_eq!(sel.points[3].nnz, 0);
    assert_eq!(sel.points[3].rss, total);
    let best = sel.points.iter().map(|p| p.bic).fold(f64::INFINITY, f64::min);
    assert_eq!(sel.points.iter().find(|p| p.lambda == sel.lambda).unwrap().bic, best);
}

#[test]
fn bic_ties_prefer_larger_lambda() {
    // both levels keep the single entry, so scores coincide
    let sel = bic_from_contraction(&[2.0, 0.0], PenaltyKind::Lasso, 5.0, 10.0, &[0.1, 0.5]);
    assert_eq!(sel.points[0].bic, sel.points[1].bic);
    assert_eq!(sel.lambda, 0.5);
}

#[test]
fn noiseless_bic_recovers_support() {
    let mut g = rng(5);
    let u = sparse_unit(&mut g, 40, &(0..40).step_by(3).collect::<Vec<_>>());
    let (v, w) = (unit_vec(&mut g, 10), unit_vec(&mut g, 8));
    let x = rank_one(50.0, &u, &v, &w);
    let grid = default_grid(50.0 * u.amax());
    let sel = bic_select(&x, &[u.clone(), v.clone(), w.clone()], Mode::One, PenaltyKind::Lasso, &grid).unwrap();
    let chosen = sel.points.iter().find(|p| p.lambda == sel.lambda).unwrap();
    assert_eq!(chosen.nnz, 14);
    assert!(bic_select(&x, &[u, v, w], Mode::One, PenaltyKind::Lasso, &[]).is_err());
}

#[test]
fn rates_with_empty_denominators() {
    assert_eq!(support_rates(&[1.0, 0.0, 2.0], &[1.0, 0.0, 0.0]), Rates { tp: 1.0, fp: 0.5 });
    assert_eq!(support_rates(&[0.0, 0.0], &[0.0, 0.0]), Rates { tp: 1.0, fp: 0.0 });
    assert_eq!(support_rates(&[1.0, 1.0], &[1.0, 1.0]), Rates { tp: 1.0, fp: 0.0 });
}

#[test]
fn mse_oracle_and_shape_check() {
    let mut g = rng(6);
    let (a, b) = (gaussian_tensor(&mut g, [3, 4, 2]), gaussian_tensor(&mut g, [3, 4, 2]));
    let want = a.as_slice().iter().zip(b.as_slice()).map(|(p, q)| (p - q).powi(2)).sum::<f64>() / 24.0;
    assert!((signal_mse(&a, &b).unwrap() - want).abs() < 1e-14);
    assert!(signal_mse(&a, &gaussian_tensor(&mut g, [3, 4, 3])).is_err());
}

#[test]
fn naive_threshold_relative_cut() {
    let u = Matrix::from_column_slice(4, 1, &[1.0, -0.5, 0.2, 0.0]);
    let m = CpModel::new(u, Matrix::from_element(1, 1, 1.0), Matrix::from_element(1, 1, 1.0), vec![1.0]).unwrap();
    let t = naive_threshold(&m, 0.5);
    assert_eq!(t.u.as_slice(), &[1.0, 0.0, 0.0, 0.0]);
    assert_eq!(naive_threshold(&m, 0.0).u.as_slice(), &[1.0, -0.5, 0.2, 0.0]);
}

#[test]
fn noiseless_roc_reaches_perfect_point() {
    let mut g = rng(7);
    let u = sparse_unit(&mut g, 30, &(0..15).collect::<Vec<_>>());
    let (v, w) = (unit_vec(&mut g, 10), unit_vec(&mut g, 8));
    let truth = CpModel::new(
        Matrix::from_columns(&[u.clone()]),
        Matrix::from_columns(&[v.clone()]),
        Matrix::from_columns(&[w.clone()]),
        vec![100.0],
    )
    .unwrap();
    let x = truth.reconstruct();
    let pts = roc_sweep(&x, &truth, RocMethod::SparseCpTpa { sparse_modes: [true, false, false] }, &default_roc_grid(11), &SolverConfig::default()).unwrap();
    assert!(pts.iter().any(|p| p.mode == Mode::One && p.tp == 1.0 && p.fp == 0.0));
    assert!(roc_sweep(&x, &truth, RocMethod::NaiveCp, &[0.5, 0.2], &SolverConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn metrics_invariant_to_permutation_and_sign(seed in 0u64..10_000, flip in prop::array::uniform3(any::<bool>())) {
        let mut g = rng(seed);
        let sp = |g: &mut _, n| Matrix::from_columns(&[sparse_unit(g, n, &[0, 2, 4]), sparse_unit(g, n, &[1, 3, 5])]);
        let truth = CpModel::new(sp(&mut g, 8), sp(&mut g, 7), sp(&mut g, 6), vec![2.0, 1.0]).unwrap();
        let mut est = truth.clone();
        for m in Mode::ALL {
            let f = est.factor_mut(m);
            *f += 0.05 * gaussian_matrix(&mut g, f.nrows(), 2);
            f.apply(|v| if v.abs() < 0.08 { *v = 0.0 });
        }
        let base = support_metrics(&est, &truth).unwrap();
        let mut perm = est.clone();
        for (i, m) in Mode::ALL.iter().enumerate() {
            let f = perm.factor_mut(*m);
            f.swap_columns(0, 1);
            if flip[i] {
                f.column_mut(0).neg_mut();
            }
        }
        perm.d.swap(0, 1);
        let other = support_metrics(&perm, &truth).unwrap();
        for m in Mode::ALL {
            let (a, b) = (base.mean(m), other.mean(m));
            prop_assert!((a.tp - b.tp).abs() < 1e-12 && (a.fp - b.fp).abs() < 1e-12);
        }
        prop_assert_eq!(base.matches.iter().map(|c| c.truth).collect::<Vec<_>>().len(), 2);
    }
}
