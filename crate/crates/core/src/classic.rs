//! Unregularized decompositions: CP-ALS, HOSVD, HOOI and the greedy Tensor
//! Power Algorithm (TPA).

use rand_chacha::ChaCha8Rng;

use crate::error::{HopcaError, Result};
use crate::linalg::{dominant_sign, leading_left_singular, normalized, orthogonalize_against, pinv_sym};
use crate::model::{
    fix_rank_one_signs, ComponentRecord, CpModel, Diagnostics, Init, RankOne, SolverConfig, TuckerModel,
};
use crate::power::{alternate, component_rng, initial_triple, random_unit, Step};
use crate::tensor::{matricize, mode_mult, Matrix, Mode, Tensor3, Vector};

const MAX_RESTARTS: usize = 5;

/// Rank-one Tensor Power Algorithm: maximizes `x ×₁ u ×₂ v ×₃ w` over unit
/// vectors by cycling `u ← x ×₂ v ×₃ w / ‖·‖` and its analogues.
pub fn tpa_rank_one(x: &Tensor3, cfg: &SolverConfig) -> Result<RankOne> {
    cfg.validate()?;
    let mut rng = component_rng(cfg, 0);
    Ok(tpa_component(x, cfg, &mut rng, None, 0))
}

/// Previously extracted factors of each mode, for Gram-Schmidt.
type Basis = [Vec<Vector>; 3];

fn tpa_component(
    x: &Tensor3,
    cfg: &SolverConfig,
    rng: &mut ChaCha8Rng,
    orth: Option<&Basis>,
    order: usize,
) -> RankOne {
    let zero = |restarts| RankOne {
        u: Vector::zeros(x.dims()[0]),
        v: Vector::zeros(x.dims()[1]),
        w: Vector::zeros(x.dims()[2]),
        d: 0.0,
        record: ComponentRecord { order, converged: true, restarts, ..Default::default() },
    };
    if x.is_zero() {
        return zero(0);
    }
    let mut init = initial_triple(x, cfg, rng);
    if let Some(basis) = orth {
        for m in [Mode::Two, Mode::Three] {
            let b = &basis[m.index()];
            init[m.index()] = orthogonalize_against(&init[m.index()], b)
                .unwrap_or_else(|| random_orthogonal(rng, init[m.index()].len(), b));
        }
    }
    let mut restarts = 0;
    loop {
        let run = alternate(
            init.clone(),
            cfg,
            |mode, f| {
                let c = x.contract_except(mode, f);
                let c = match orth {
                    Some(basis) => orthogonalize_against(&c, &basis[mode.index()]),
                    None => normalized(&c),
                };
                match c {
                    Some(c) => Step::Factor(c),
                    None => Step::Zero,
                }
            },
            |f| x.contract_all(f[0].as_slice(), f[1].as_slice(), f[2].as_slice()),
        );
        if run.zeroed.is_some() {
            if restarts >= MAX_RESTARTS {
                return zero(restarts);
            }
            restarts += 1;
            let [n, p, q] = x.dims();
            init = [Vector::zeros(n), random_unit(rng, p), random_unit(rng, q)];
            if let Some(basis) = orth {
                init[1] = random_orthogonal(rng, p, &basis[1]);
                init[2] = random_orthogonal(rng, q, &basis[2]);
            }
            continue;
        }
        let [mut u, mut v, mut w] = run.factors;
        fix_rank_one_signs(&mut u, &mut v, &mut w);
        let d = x.contract_all(u.as_slice(), v.as_slice(), w.as_slice()).max(0.0);
        let record = ComponentRecord {
            order,
            iterations: run.sweeps,
            converged: run.converged,
            d,
            trace: run.trace,
            lambdas: [0.0; 3],
            nnz: [nnz(&u), nnz(&v), nnz(&w)],
            restarts,
        };
        return RankOne { u, v, w, d, record };
    }
}

fn random_orthogonal(rng: &mut ChaCha8Rng, len: usize, basis: &[Vector]) -> Vector {
    for _ in 0..100 {
        if let Some(v) = orthogonalize_against(&random_unit(rng, len), basis) {
            return v;
        }
    }
    Vector::zeros(len)
}

pub(crate) fn nnz(v: &Vector) -> usize {
    v.iter().filter(|&&x| x != 0.0).count()
}

/// Greedy Tensor Power Algorithm with deflation. Components are returned
/// sorted by descending weight; `Diagnostics::components[k].order` keeps the
/// greedy order. A zero component stops the deflation and the remaining
/// columns are zero-filled.
pub fn tpa(x: &Tensor3, k: usize, cfg: &SolverConfig) -> Result<(CpModel, Diagnostics)> {
    cfg.validate()?;
    if k == 0 {
        return Err(HopcaError::arg("number of components must be at least 1"));
    }
    if cfg.orthogonalize && x.dims().iter().any(|&d| d < k) {
        return Err(HopcaError::arg("orthogonalized TPA needs every dimension to be at least K"));
    }
    let mut residual = x.clone();
    let mut comps = Vec::with_capacity(k);
    let mut diag = Diagnostics::default();
    let mut basis: Basis = Default::default();
    for c in 0..k {
        let mut rng = component_rng(cfg, c);
        let orth = cfg.orthogonalize.then_some(&basis);
        let comp = tpa_component(&residual, cfg, &mut rng, orth, c);
        if comp.is_zero() {
            diag.flag(format!("component {} is zero; remaining {} components zero-filled", c + 1, k - c));
            break;
        }
        residual.add_outer(-comp.d, comp.u.as_slice(), comp.v.as_slice(), comp.w.as_slice());
        if cfg.orthogonalize {
            basis[0].push(comp.u.clone());
            basis[1].push(comp.v.clone());
            basis[2].push(comp.w.clone());
        }
        comps.push(comp);
    }
    Ok(finish_deflation(x.dims(), k, comps, diag, residual.frob_norm()))
}

/// Assembles deflation components into a model sorted by descending weight.
pub(crate) fn finish_deflation(
    dims: [usize; 3],
    k: usize,
    comps: Vec<RankOne>,
    mut diag: Diagnostics,
    residual_norm: f64,
) -> (CpModel, Diagnostics) {
    let mut model = CpModel::zeros(dims, k);
    for (c, comp) in comps.iter().enumerate() {
        model.u.set_column(c, &comp.u);
        model.v.set_column(c, &comp.v);
        model.w.set_column(c, &comp.w);
        model.d[c] = comp.d;
    }
    let perm = model.sort_descending();
    let mut records: Vec<ComponentRecord> = comps.into_iter().map(|c| c.record).collect();
    while records.len() < k {
        records.push(ComponentRecord { order: records.len(), converged: true, ..Default::default() });
    }
    diag.iterations = records.iter().map(|r| r.iterations).sum();
    diag.converged = records.iter().all(|r| r.converged);
    diag.objective = residual_norm;
    diag.note("greedy_order", perm.iter().map(|p| (p + 1).to_string()).collect::<Vec<_>>().join(","));
    diag.components = records;
    (model, diag)
}

/// Mode-`mode` MTTKRP: column `k` is the contraction of `x` with the `k`-th
/// columns of the two other factors.
pub(crate) fn mttkrp(x: &Tensor3, mode: Mode, factors: &[Matrix; 3]) -> Matrix {
    let (a, b) = mode.others();
    let (fa, fb) = (&factors[a.index()], &factors[b.index()]);
    let k = fa.ncols();
    let mut out = Matrix::zeros(x.dim(mode), k);
    for c in 0..k {
        let col = x.contract_pair(mode, fa.column(c).as_slice(), fb.column(c).as_slice());
        out.set_column(c, &col);
    }
    out
}

/// Hadamard product of the Gram matrices of the two factors other than `mode`.
pub(crate) fn gram_hadamard(mode: Mode, factors: &[Matrix; 3]) -> Matrix {
    let (a, b) = mode.others();
    let ga = factors[a.index()].transpose() * &factors[a.index()];
    let gb = factors[b.index()].transpose() * &factors[b.index()];
    ga.component_mul(&gb)
}

pub(crate) fn cp_residual_norm(x: &Tensor3, factors: &[Matrix; 3], d: &[f64]) -> f64 {
    let model = CpModel { u: factors[0].clone(), v: factors[1].clone(), w: factors[2].clone(), d: d.to_vec() };
    x.sub(&model.reconstruct()).frob_norm()
}

/// Unit-norm starting factors for the ALS family.
pub(crate) fn als_init(x: &Tensor3, k: usize, cfg: &SolverConfig) -> [Matrix; 3] {
    let mut rng = component_rng(cfg, 0);
    let mut factors: [Matrix; 3] = Default::default();
    for mode in Mode::ALL {
        let dim = x.dim(mode);
        let mut m = Matrix::zeros(dim, k);
        let lead = if cfg.init == Init::Hosvd { k.min(dim) } else { 0 };
        if lead > 0 {
            let s = leading_left_singular(&matricize(x, mode), lead);
            m.columns_mut(0, lead).copy_from(&s.vectors);
        }
        for c in lead..k {
            m.set_column(c, &random_unit(&mut rng, dim));
        }
        factors[mode.index()] = m;
    }
    factors
}

/// Normalizes the columns of `scaled` in place and returns their norms.
pub(crate) fn normalize_columns(scaled: &mut Matrix) -> Vec<f64> {
    (0..scaled.ncols())
        .map(|c| {
            let n = scaled.column(c).norm();
            if n > 0.0 {
                scaled.column_mut(c).unscale_mut(n);
            }
            n
        })
        .collect()
}

/// CP decomposition by alternating least squares. Each mode solves
/// `Û = X₍ₘ₎ · KR · G⁺` (Gram-Hadamard form), then columns are normalized with
/// `dₖ = ‖ûₖ‖`. Stops when the change of `‖x − x̂‖ / ‖x‖` between sweeps
/// drops below `tol`.
pub fn cp_als(x: &Tensor3, k: usize, cfg: &SolverConfig) -> Result<(CpModel, Diagnostics)> {
    cfg.validate()?;
    if k == 0 {
        return Err(HopcaError::arg("number of components must be at least 1"));
    }
    let mut diag = Diagnostics::default();
    let norm_x = x.frob_norm();
    if norm_x == 0.0 {
        diag.converged = true;
        diag.flag("input tensor is zero");
        return Ok((CpModel::zeros(x.dims(), k), diag));
    }
    let mut factors = als_init(x, k, cfg);
    let mut d = vec![1.0; k];
    let mut prev_fit = f64::INFINITY;
    let mut singular_flagged = false;
    for sweep in 1..=cfg.max_iter {
        for mode in Mode::ALL {
            let b = mttkrp(x, mode, &factors);
            let g = gram_hadamard(mode, &factors);
            let (g_inv, singular) = pinv_sym(&g, 1e-12);
            if singular && !singular_flagged {
                diag.flag(format!("singular least-squares system at sweep {sweep}; pseudo-inverse used"));
                singular_flagged = true;
            }
            let mut scaled = b * g_inv;
            d = normalize_columns(&mut scaled);
            factors[mode.index()] = scaled;
        }
        let fit = cp_residual_norm(x, &factors, &d);
        diag.trace.push(fit);
        diag.iterations = sweep;
        if (prev_fit - fit).abs() / norm_x < cfg.tol {
            diag.converged = true;
            break;
        }
        prev_fit = fit;
    }
    let [u, v, w] = factors;
    let mut model = CpModel { u, v, w, d };
    model.sort_descending();
    model.fix_signs();
    diag.objective = *diag.trace.last().unwrap_or(&norm_x);
    Ok((model, diag))
}

pub(crate) fn check_ranks(x: &Tensor3, ranks: [usize; 3]) -> Result<()> {
    for (m, (&r, &d)) in ranks.iter().zip(x.dims().iter()).enumerate() {
        if r == 0 || r > d {
            return Err(HopcaError::arg(format!("rank {r} for mode {} must lie in 1..={d}", m + 1)));
        }
    }
    Ok(())
}

/// `x ×₁ Uᵀ ×₂ Vᵀ ×₃ Wᵀ`.
pub fn project_core(x: &Tensor3, u: &Matrix, v: &Matrix, w: &Matrix) -> Result<Tensor3> {
    let t = mode_mult(x, &u.transpose(), Mode::One)?;
    let t = mode_mult(&t, &v.transpose(), Mode::Two)?;
    mode_mult(&t, &w.transpose(), Mode::Three)
}

fn fix_column_signs(m: &mut Matrix) {
    for c in 0..m.ncols() {
        if dominant_sign(m.column(c).as_slice()) < 0.0 {
            m.column_mut(c).neg_mut();
        }
    }
}

/// Truncated higher-order SVD: each factor holds the leading left singular
/// vectors of the corresponding unfolding.
pub fn hosvd(x: &Tensor3, ranks: [usize; 3]) -> Result<(TuckerModel, Diagnostics)> {
    check_ranks(x, ranks)?;
    let mut diag = Diagnostics::default();
    let mut factors: [Matrix; 3] = Default::default();
    for mode in Mode::ALL {
        let s = leading_left_singular(&matricize(x, mode), ranks[mode.index()]);
        if let Some(gap) = s.gap {
            diag.note(format!("mode{}.singular_gap", mode.number()), format!("{gap:.6e}"));
        }
        let mut f = s.vectors;
        fix_column_signs(&mut f);
        factors[mode.index()] = f;
    }
    let [u, v, w] = factors;
    let core = project_core(x, &u, &v, &w)?;
    diag.objective = core.frob_norm();
    diag.converged = true;
    Ok((TuckerModel { u, v, w, core }, diag))
}

/// Higher-order orthogonal iteration started from the HOSVD. Each sweep
/// replaces a factor by the leading left singular vectors of the tensor
/// projected onto the other two factors; stops when the change of
/// `‖core‖ / ‖x‖` drops below `tol`.
pub fn hooi(x: &Tensor3, ranks: [usize; 3], cfg: &SolverConfig) -> Result<(TuckerModel, Diagnostics)> {
    cfg.validate()?;
    let (start, mut diag) = hosvd(x, ranks)?;
    let norm_x = x.frob_norm();
    let mut factors = [start.u, start.v, start.w];
    let mut prev = start.core.frob_norm();
    diag.trace.push(prev);
    diag.converged = norm_x == 0.0;
    if norm_x > 0.0 {
        for sweep in 1..=cfg.max_iter {
            for mode in Mode::ALL {
                let (a, b) = mode.others();
                let t = mode_mult(x, &factors[a.index()].transpose(), a)?;
                let t = mode_mult(&t, &factors[b.index()].transpose(), b)?;
                let s = leading_left_singular(&matricize(&t, mode), ranks[mode.index()]);
                if let Some(gap) = s.gap {
                    diag.note(format!("sweep{sweep}.mode{}.singular_gap", mode.number()), format!("{gap:.6e}"));
                }
                factors[mode.index()] = s.vectors;
            }
            let core = project_core(x, &factors[0], &factors[1], &factors[2])?;
            let now = core.frob_norm();
            diag.trace.push(now);
            diag.iterations = sweep;
            if (now - prev).abs() / norm_x < cfg.tol {
                diag.converged = true;
                break;
            }
            prev = now;
        }
    }
    // keep only the final gap notes to bound diagnostics size
    let last = format!("sweep{}.", diag.iterations);
    diag.extra.retain(|(k, _)| !k.starts_with("sweep") || k.starts_with(&last));
    for f in factors.iter_mut() {
        fix_column_signs(f);
    }
    let [u, v, w] = factors;
    let core = project_core(x, &u, &v, &w)?;
    diag.objective = core.frob_norm();
    Ok((TuckerModel { u, v, w, core }, diag))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(v: &[f64]) -> Vector {
        let v = Vector::from_column_slice(v);
        v.normalize()
    }

    fn lcg_tensor(dims: [usize; 3], seed: u64) -> Tensor3 {
        let mut s = seed;
        Tensor3::from_fn(dims, |_, _, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
    }

    #[test]
    fn single_entry_tensor() {
        let mut x = Tensor3::zeros([3, 3, 3]);
        x.set(0, 0, 0, 7.0);
        let r = tpa_rank_one(&x, &SolverConfig::default()).unwrap();
        assert!((r.d - 7.0).abs() < 1e-12);
        for f in r.factors() {
            assert!((f[0].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tpa_objective_never_decreases() {
        let x = lcg_tensor([5, 5, 5], 17);
        let r = tpa_rank_one(&x, &SolverConfig::default()).unwrap();
        for pair in r.record.trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-12, "{pair:?}");
        }
    }

    #[test]
    fn tpa_zero_tensor_gives_zero_component() {
        let x = Tensor3::zeros([3, 4, 5]);
        let (m, diag) = tpa(&x, 2, &SolverConfig::default()).unwrap();
        assert_eq!(m.d, vec![0.0, 0.0]);
        assert!(!diag.flags.is_empty());
        let (m, _) = cp_als(&x, 1, &SolverConfig::default()).unwrap();
        assert_eq!(m.d, vec![0.0]);
    }

    #[test]
    fn cp_als_rank_one_exact() {
        let (u, v, w) = (unit(&[1.0, 2.0, 3.0]), unit(&[1.0, -1.0, 0.5, 2.0]), unit(&[0.3, 0.1, -0.2, 1.0, 0.4]));
        let x = crate::tensor::outer3(u.as_slice(), v.as_slice(), w.as_slice(), 100.0);
        let (m, _) = cp_als(&x, 1, &SolverConfig::default()).unwrap();
        assert!((m.d[0] - 100.0).abs() < 1e-6 * 100.0);
        assert!(m.u.column(0).dot(&u).abs() >= 1.0 - 1e-8);
    }

    #[test]
    fn cp_als_fit_is_monotone() {
        let x = lcg_tensor([6, 5, 4], 3);
        let (_, diag) = cp_als(&x, 3, &SolverConfig::default().with_tol(1e-12).with_max_iter(200)).unwrap();
        for pair in diag.trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-10, "{pair:?}");
        }
    }

    #[test]
    fn hosvd_rank_one_core_is_weight() {
        let (u, v, w) = (unit(&[1.0, 2.0]), unit(&[0.0, 1.0, 1.0]), unit(&[3.0, -1.0]));
        let x = crate::tensor::outer3(u.as_slice(), v.as_slice(), w.as_slice(), 4.5);
        let (t, _) = hosvd(&x, [1, 1, 1]).unwrap();
        assert!((t.core.get(0, 0, 0).abs() - 4.5).abs() < 1e-12);
        assert!(hosvd(&x, [3, 1, 1]).is_err());
    }

    #[test]
    fn hooi_improves_on_hosvd() {
        for seed in 0..5 {
            let x = lcg_tensor([5, 6, 4], seed);
            let (a, _) = hosvd(&x, [2, 2, 2]).unwrap();
            let (b, diag) = hooi(&x, [2, 2, 2], &SolverConfig::default()).unwrap();
            assert!(b.core.frob_norm() >= a.core.frob_norm() - 1e-12);
            for pair in diag.trace.windows(2) {
                assert!(pair[1] >= pair[0] - 1e-12);
            }
            assert!(b.is_orthonormal(1e-10));
        }
    }

    #[test]
    fn orthogonalized_tpa_gives_orthonormal_factors() {
        let x = lcg_tensor([6, 5, 4], 8);
        let cfg = SolverConfig { orthogonalize: true, ..Default::default() };
        let (m, _) = tpa(&x, 3, &cfg).unwrap();
        for f in [&m.u, &m.v, &m.w] {
            let g = f.transpose() * f;
            assert!((g - Matrix::identity(3, 3)).amax() < 1e-8);
        }
    }
}
