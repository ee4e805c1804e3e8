mod common;

use common::*;
use hopca::functional::{fpca_gradient, half_smooth, fpca_objective, fourth_diff_penalty, second_diff_penalty};
use hopca::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn sinusoid(n: usize, freq: f64) -> Vector {
    Vector::from_fn(n, |i, _| (2.0 * PI * freq * i as f64 / (n - 1) as f64).sin()).normalize()
}

fn noisy_smooth(seed: u64) -> (Tensor3, [Vector; 3]) {
    let f = [sinusoid(30, 1.0), sinusoid(25, 0.5), sinusoid(20, 1.5)];
    let mut x = rank_one(20.0, &f[0], &f[1], &f[2]);
    let mut e = gaussian_tensor(&mut rng(seed), x.dims());
    e.scale(0.3);
    x.add_assign(&e);
    (x, f)
}

#[test]
fn smoothing_lowers_roughness_against_tpa() {
    let (x, truth) = noisy_smooth(1);
    let cfg = SolverConfig::default();
    let s = SmootherSet::from_differences(x.dims(), 10.0, Smoother::SecondDifference).unwrap();
    let smooth = fpca_rank_one(&x, &s, &cfg).unwrap().unit;
    let raw = tpa_rank_one(&x, &cfg).unwrap();
    for (m, (a, b)) in Mode::ALL.iter().zip([(&smooth.u, &raw.u), (&smooth.v, &raw.v), (&smooth.w, &raw.w)]) {
        assert!(s.roughness(*m, a) < s.roughness(*m, b));
    }
    assert!(cosine(&smooth.u, &truth[0]).abs() > cosine(&raw.u, &truth[0]).abs());
}

#[test]
fn zero_smoothing_matches_tpa() {
    let x = gaussian_tensor(&mut rng(2), [6, 5, 4]);
    let cfg = SolverConfig::default().with_tol(1e-12);
    let s = SmootherSet::identity(x.dims());
    let (a, _) = fpca(&x, 2, &s, &cfg).unwrap();
    let (b, _) = tpa(&x, 2, &cfg).unwrap();
    assert!((&a.u - &b.u).amax() < 1e-8 && (&a.w - &b.w).amax() < 1e-8);
    assert!(a.d.iter().zip(&b.d).all(|(p, q)| (p - q).abs() < 1e-8));
}

#[test]
fn half_smooth_diagonal_elementwise() {
    let dims = [4, 3, 5];
    let mut g = rng(3);
    let diags = dims.map(|n| Vector::from_fn(n, |i, _| 0.5 + i as f64));
    let omega = diags.clone().map(|d| Matrix::from_diagonal(&d));
    let alpha = 0.7;
    let s = SmootherSet::new(omega, alpha).unwrap();
    let x = gaussian_tensor(&mut g, dims);
    let h = half_smooth(&x, &s).unwrap();
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let scale = ((1.0 + alpha * diags[0][i]) * (1.0 + alpha * diags[1][j]) * (1.0 + alpha * diags[2][k])).sqrt();
                assert!((h.get(i, j, k) - x.get(i, j, k) / scale).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn half_smoothing_maps_factors_back() {
    let (x, _) = noisy_smooth(4);
    let s = SmootherSet::from_differences(x.dims(), 2.0, Smoother::SecondDifference).unwrap();
    let h = fpca_half_smoothing(&x, &s, [2, 2, 2], &SolverConfig::default()).unwrap();
    for m in Mode::ALL {
        let back = s.s_inv_sqrt(m) * h.smoothed.factor(m);
        assert!((back - h.model.factor(m)).amax() < 1e-14);
        // S-orthonormal columns
        let gram = h.model.factor(m).transpose() * s.s(m) * h.model.factor(m);
        assert!((gram - Matrix::identity(2, 2)).amax() < 1e-10);
    }
}

#[test]
fn stationary_point_has_zero_gradient() {
    let (x, _) = noisy_smooth(5);
    let s = SmootherSet::from_differences(x.dims(), 1.0, Smoother::FourthDifference).unwrap();
    let r = fpca_rank_one(&x, &s, &SolverConfig::default().with_tol(1e-12).with_max_iter(5000)).unwrap();
    let scale = x.frob_norm();
    for m in Mode::ALL {
        assert!(fpca_gradient(&x, &s, &r.raw, m).amax() < 1e-6 * scale);
    }
}

#[test]
fn difference_penalties_annihilate_polynomials() {
    let line = Vector::from_fn(8, |i, _| 2.0 + 3.0 * i as f64);
    assert!((second_diff_penalty(8, 1.0).unwrap() * &line).amax() < 1e-10);
    let cubic = Vector::from_fn(8, |i, _| (i as f64).powi(3) - i as f64);
    assert!((fourth_diff_penalty(8, 1.0).unwrap() * &cubic).amax() < 1e-8);
    assert!(fourth_diff_penalty(4, 1.0).is_err());
}

#[test]
fn negative_alpha_rejected() {
    assert!(SmootherSet::from_differences([5, 5, 5], -1.0, Smoother::SecondDifference).is_err());
    let x = gaussian_tensor(&mut rng(6), [5, 5, 5]);
    let s = SmootherSet::identity([4, 5, 5]);
    assert!(fpca_rank_one(&x, &s, &SolverConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fpca_objective_non_increasing(seed in 0u64..10_000, alpha in 0.0f64..20.0) {
        let x = gaussian_tensor(&mut rng(seed), [8, 7, 6]);
        let s = SmootherSet::from_differences(x.dims(), alpha, Smoother::SecondDifference).unwrap();
        let r = fpca_rank_one(&x, &s, &SolverConfig::default()).unwrap();
        let tr = &r.unit.record.trace;
        prop_assert!(tr.windows(2).all(|w| w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0)));
        prop_assert!(fpca_objective(&x, &s, &r.raw) <= x.frob_norm().powi(2) + 1e-9);
    }
}
