//! General order-one penalties, non-negativity, and Generalized CP under
//! three-way quadratic norms.

use std::ops::Range;

use crate::classic::finish_deflation;
use crate::error::{HopcaError, Result};
use crate::linalg::{check_symmetric, min_eigenvalue, normalized, power_max_eigenvalue};
use crate::model::{fix_rank_one_signs, ComponentRecord, CpModel, Diagnostics, RankOne, SolverConfig};
use crate::power::{alternate, component_rng, initial_triple, Step};
use crate::sparse::soft_threshold;
use crate::tensor::{Matrix, Mode, Tensor3, Vector};

/// KKT tolerance of [`qnorm_lasso_solve`].
pub const QLASSO_TOL: f64 = 1e-8;
const QLASSO_MAX_ITER: usize = 200_000;

/// `max(x − λ, 0)`.
pub fn positive_threshold(x: f64, lam: f64) -> f64 {
    (x - lam).max(0.0)
}

pub fn positive_threshold_vec(x: &Vector, lam: f64) -> Vector {
    x.map(|v| positive_threshold(v, lam))
}

/// A convex penalty that is homogeneous of order one, given by its value and
/// its proximal map `argmin_z ½‖y − z‖² + scale·P(z)`.
pub trait PenaltyFn: Send + Sync {
    fn value(&self, x: &Vector) -> f64;
    fn prox(&self, y: &Vector, scale: f64) -> Vector;
    fn name(&self) -> &'static str;
}

/// `‖x‖₁`.
#[derive(Clone, Copy, Debug, Default)]
pub struct L1;

impl PenaltyFn for L1 {
    fn value(&self, x: &Vector) -> f64 {
        x.lp_norm(1)
    }
    fn prox(&self, y: &Vector, scale: f64) -> Vector {
        y.map(|v| soft_threshold(v, scale))
    }
    fn name(&self) -> &'static str {
        "lasso"
    }
}

/// `‖x‖₁` restricted to the non-negative orthant (infinite elsewhere).
#[derive(Clone, Copy, Debug, Default)]
pub struct NonnegL1;

impl PenaltyFn for NonnegL1 {
    fn value(&self, x: &Vector) -> f64 {
        if x.iter().any(|v| *v < 0.0) {
            f64::INFINITY
        } else {
            x.sum()
        }
    }
    fn prox(&self, y: &Vector, scale: f64) -> Vector {
        positive_threshold_vec(y, scale)
    }
    fn name(&self) -> &'static str {
        "nonneg_lasso"
    }
}

/// `Σ_g ‖x_g‖₂` over disjoint index groups.
#[derive(Clone, Debug)]
pub struct GroupLasso {
    groups: Vec<Range<usize>>,
}

impl GroupLasso {
    pub fn new(groups: Vec<Range<usize>>) -> Result<Self> {
        let mut sorted = groups.clone();
        sorted.sort_by_key(|g| g.start);
        if sorted.iter().any(|g| g.is_empty()) || sorted.windows(2).any(|w| w[1].start < w[0].end) {
            return Err(HopcaError::arg("groups must be non-empty and disjoint"));
        }
        Ok(GroupLasso { groups })
    }

    /// Consecutive blocks of `block` entries covering `0..len`.
    pub fn contiguous(len: usize, block: usize) -> Result<Self> {
        if block == 0 {
            return Err(HopcaError::arg("group size must be positive"));
        }
        Self::new((0..len).step_by(block).map(|s| s..(s + block).min(len)).collect())
    }

    pub fn groups(&self) -> &[Range<usize>] {
        &self.groups
    }
}

impl PenaltyFn for GroupLasso {
    fn value(&self, x: &Vector) -> f64 {
        self.groups.iter().map(|g| x.rows(g.start, g.len()).norm()).sum()
    }
    fn prox(&self, y: &Vector, scale: f64) -> Vector {
        let mut out = y.clone();
        for g in &self.groups {
            let mut block = out.rows_mut(g.start, g.len());
            let n = block.norm();
            if n <= scale {
                block.fill(0.0);
            } else if scale > 0.0 {
                block *= 1.0 - scale / n;
            }
        }
        out
    }
    fn name(&self) -> &'static str {
        "group_lasso"
    }
}

/// A penalty and its level for one mode.
#[derive(Clone, Copy)]
pub struct ModePenaltyFn<'a> {
    pub penalty: &'a dyn PenaltyFn,
    pub lambda: f64,
}

impl<'a> ModePenaltyFn<'a> {
    pub fn new(penalty: &'a dyn PenaltyFn, lambda: f64) -> Self {
        ModePenaltyFn { penalty, lambda }
    }
}

fn zero_component(dims: [usize; 3], order: usize, iterations: usize, lambdas: [f64; 3], trace: Vec<f64>) -> RankOne {
    RankOne {
        u: Vector::zeros(dims[0]),
        v: Vector::zeros(dims[1]),
        w: Vector::zeros(dims[2]),
        d: 0.0,
        record: ComponentRecord { order, iterations, converged: true, lambdas, trace, ..Default::default() },
    }
}

fn count_nonzero(v: &Vector) -> usize {
    v.iter().filter(|x| **x != 0.0).count()
}

/// `x ×₁u ×₂v ×₃w − Σ λₘ Pₘ(fₘ)`.
pub fn general_objective(x: &Tensor3, f: &[Vector; 3], pens: &[ModePenaltyFn<'_>; 3]) -> f64 {
    let fit = x.contract_all(f[0].as_slice(), f[1].as_slice(), f[2].as_slice());
    fit - pens
        .iter()
        .zip(f.iter())
        .map(|(p, v)| if p.lambda == 0.0 { 0.0 } else { p.lambda * p.penalty.value(v) })
        .sum::<f64>()
}

/// Rank-one CP-TPA with a general penalty per mode: each update applies the
/// penalty's proximal map to the contraction and rescales to unit norm.
pub fn general_cp_tpa_rank_one(x: &Tensor3, pens: &[ModePenaltyFn<'_>; 3], cfg: &SolverConfig) -> Result<RankOne> {
    cfg.validate()?;
    check_levels(pens)?;
    let mut rng = component_rng(cfg, 0);
    Ok(general_component(x, pens, cfg, &mut rng, 0))
}

fn check_levels(pens: &[ModePenaltyFn<'_>; 3]) -> Result<()> {
    if pens.iter().any(|p| !(p.lambda >= 0.0) || !p.lambda.is_finite()) {
        return Err(HopcaError::arg("penalty levels must be non-negative"));
    }
    Ok(())
}

fn general_component(
    x: &Tensor3,
    pens: &[ModePenaltyFn<'_>; 3],
    cfg: &SolverConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
    order: usize,
) -> RankOne {
    let lambdas = pens.map(|p| p.lambda);
    if x.is_zero() {
        return zero_component(x.dims(), order, 0, lambdas, Vec::new());
    }
    let init = initial_triple(x, cfg, rng);
    let run = alternate(
        init,
        cfg,
        |mode, f| {
            let c = x.contract_except(mode, f);
            let p = &pens[mode.index()];
            match normalized(&p.penalty.prox(&c, p.lambda)) {
                Some(u) => Step::Factor(u),
                None => Step::Zero,
            }
        },
        |f| general_objective(x, f, pens),
    );
    if run.zeroed.is_some() {
        return zero_component(x.dims(), order, run.sweeps, lambdas, run.trace);
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
        lambdas,
        nnz: [count_nonzero(&u), count_nonzero(&v), count_nonzero(&w)],
        restarts: 0,
    };
    RankOne { u, v, w, d, record }
}

/// Deflation over [`general_cp_tpa_rank_one`] components.
pub fn general_cp_tpa(
    x: &Tensor3,
    k: usize,
    pens: &[ModePenaltyFn<'_>; 3],
    cfg: &SolverConfig,
) -> Result<(CpModel, Diagnostics)> {
    cfg.validate()?;
    check_levels(pens)?;
    if k == 0 {
        return Err(HopcaError::arg("number of components must be at least 1"));
    }
    let mut residual = x.clone();
    let mut comps = Vec::with_capacity(k);
    let mut diag = Diagnostics::default();
    for c in 0..k {
        let mut rng = component_rng(cfg, c);
        let comp = general_component(&residual, pens, cfg, &mut rng, c);
        if comp.is_zero() {
            diag.flag(format!("component {} is zero; remaining {} components zero-filled", c + 1, k - c));
            break;
        }
        residual.add_outer(-comp.d, comp.u.as_slice(), comp.v.as_slice(), comp.w.as_slice());
        comps.push(comp);
    }
    Ok(finish_deflation(x.dims(), k, comps, diag, residual.frob_norm()))
}

/// Symmetric positive semi-definite operators defining the three-way
/// quadratic norm.
#[derive(Clone, Debug)]
pub struct QuadOperators {
    q: [Matrix; 3],
    min_eig: [f64; 3],
    identity: [bool; 3],
    diagonal: [bool; 3],
}

fn is_identity(m: &Matrix) -> bool {
    m.is_square() && m.iter().enumerate().all(|(i, v)| *v == if i % (m.nrows() + 1) == 0 { 1.0 } else { 0.0 })
}

fn is_diagonal(m: &Matrix) -> bool {
    (0..m.ncols()).all(|c| (0..m.nrows()).all(|r| r == c || m[(r, c)] == 0.0))
}

impl QuadOperators {
    pub fn new(q1: Matrix, q2: Matrix, q3: Matrix) -> Result<Self> {
        let q = [q1, q2, q3];
        let mut min_eig = [0.0; 3];
        for (i, m) in q.iter().enumerate() {
            let name = format!("Q{}", i + 1);
            check_symmetric(&name, m, 1e-12)?;
            let e = min_eigenvalue(m);
            if e < -1e-10 * m.amax().max(1.0) {
                return Err(HopcaError::NotPositiveSemiDefinite { name, min_eig: e });
            }
            min_eig[i] = e;
        }
        let identity = [is_identity(&q[0]), is_identity(&q[1]), is_identity(&q[2])];
        let diagonal = [is_diagonal(&q[0]), is_diagonal(&q[1]), is_diagonal(&q[2])];
        Ok(QuadOperators { q, min_eig, identity, diagonal })
    }

    pub fn identity(dims: [usize; 3]) -> Self {
        let q = dims.map(|n| Matrix::identity(n, n));
        QuadOperators { q, min_eig: [1.0; 3], identity: [true; 3], diagonal: [true; 3] }
    }

    pub fn get(&self, mode: Mode) -> &Matrix {
        &self.q[mode.index()]
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.q[0].nrows(), self.q[1].nrows(), self.q[2].nrows()]
    }

    /// Errors unless every operator is positive definite.
    pub fn require_pd(&self) -> Result<()> {
        for (i, e) in self.min_eig.iter().enumerate() {
            if !(*e > 0.0) {
                return Err(HopcaError::NotPositiveDefinite { name: format!("Q{}", i + 1), min_eig: *e });
            }
        }
        Ok(())
    }

    fn check_dims(&self, x: &Tensor3) -> Result<()> {
        if self.dims() != x.dims() {
            return Err(HopcaError::dim(format!("operators {:?} do not match tensor {:?}", self.dims(), x.dims())));
        }
        Ok(())
    }

    /// `Qₘ f`.
    pub fn apply(&self, mode: Mode, f: &Vector) -> Vector {
        if self.identity[mode.index()] {
            f.clone()
        } else {
            &self.q[mode.index()] * f
        }
    }

    /// `‖f‖_{Qₘ} = √(fᵀQₘf)`.
    pub fn norm(&self, mode: Mode, f: &Vector) -> f64 {
        if self.identity[mode.index()] {
            f.norm()
        } else {
            f.dot(&(&self.q[mode.index()] * f)).max(0.0).sqrt()
        }
    }

    fn normalized(&self, mode: Mode, f: &Vector) -> Option<Vector> {
        if self.identity[mode.index()] {
            return normalized(f);
        }
        let n = self.norm(mode, f);
        (n > 0.0).then(|| f / n)
    }

    fn weighted(&self, f: &[Vector; 3]) -> [Vector; 3] {
        [self.apply(Mode::One, &f[0]), self.apply(Mode::Two, &f[1]), self.apply(Mode::Three, &f[2])]
    }
}

/// `x ×₁Q₁u ×₂Q₂v ×₃Q₃w`.
pub fn gcp_fit(x: &Tensor3, q: &QuadOperators, f: &[Vector; 3]) -> f64 {
    let g = q.weighted(f);
    x.contract_all(g[0].as_slice(), g[1].as_slice(), g[2].as_slice())
}

/// Penalized Generalized CP objective `x ×₁Q₁u ×₂Q₂v ×₃Q₃w − Σ λₘ‖fₘ‖₁`.
pub fn sparse_gcp_objective(x: &Tensor3, q: &QuadOperators, f: &[Vector; 3], lam: [f64; 3]) -> f64 {
    gcp_fit(x, q, f) - (0..3).map(|m| lam[m] * f[m].lp_norm(1)).sum::<f64>()
}

/// Rank-one Generalized CP: maximizes `x ×₁Q₁u ×₂Q₂v ×₃Q₃w` subject to
/// `uᵀQ₁u = vᵀQ₂v = wᵀQ₃w = 1`.
pub fn gcp_rank_one(x: &Tensor3, q: &QuadOperators, cfg: &SolverConfig) -> Result<RankOne> {
    sparse_gcp_rank_one(x, q, [0.0; 3], cfg)
}

/// Rank-one Sparse Generalized CP. Each update solves a Q-norm lasso on the
/// weighted contraction and rescales to unit Q-norm (or zeroes the
/// component).
pub fn sparse_gcp_rank_one(x: &Tensor3, q: &QuadOperators, lam: [f64; 3], cfg: &SolverConfig) -> Result<RankOne> {
    cfg.validate()?;
    q.check_dims(x)?;
    q.require_pd()?;
    if lam.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(HopcaError::arg("penalty levels must be non-negative"));
    }
    let mut rng = component_rng(cfg, 0);
    gcp_component(x, q, lam, cfg, &mut rng, 0)
}

fn gcp_component(
    x: &Tensor3,
    q: &QuadOperators,
    lam: [f64; 3],
    cfg: &SolverConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
    order: usize,
) -> Result<RankOne> {
    if x.is_zero() {
        return Ok(zero_component(x.dims(), order, 0, lam, Vec::new()));
    }
    let mut init = initial_triple(x, cfg, rng);
    for m in [Mode::Two, Mode::Three] {
        if q.identity[m.index()] {
            continue;
        }
        if let Some(f) = q.normalized(m, &init[m.index()]) {
            init[m.index()] = f;
        }
    }
    let mut failure = None;
    let run = alternate(
        init,
        cfg,
        |mode, f| {
            let g = q.weighted(f);
            let c = x.contract_except(mode, &g);
            let l = lam[mode.index()];
            let u = if l == 0.0 {
                c
            } else {
                match qnorm_lasso_inner(&c, q, mode, l) {
                    Ok(u) => u,
                    Err(e) => {
                        failure.get_or_insert(e);
                        return Step::Zero;
                    }
                }
            };
            match q.normalized(mode, &u) {
                Some(u) => Step::Factor(u),
                None => Step::Zero,
            }
        },
        |f| sparse_gcp_objective(x, q, f, lam),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if run.zeroed.is_some() {
        return Ok(zero_component(x.dims(), order, run.sweeps, lam, run.trace));
    }
    let [mut u, mut v, mut w] = run.factors;
    fix_rank_one_signs(&mut u, &mut v, &mut w);
    let d = gcp_fit(x, q, &[u.clone(), v.clone(), w.clone()]).max(0.0);
    let record = ComponentRecord {
        order,
        iterations: run.sweeps,
        converged: run.converged,
        d,
        trace: run.trace,
        lambdas: lam,
        nnz: [count_nonzero(&u), count_nonzero(&v), count_nonzero(&w)],
        restarts: 0,
    };
    Ok(RankOne { u, v, w, d, record })
}

/// `K` Generalized CP components by deflation. The fitted term removed at
/// each step is `d·u∘v∘w`, with `d` the Q-weighted fit.
pub fn gcp(x: &Tensor3, k: usize, q: &QuadOperators, lam: [f64; 3], cfg: &SolverConfig) -> Result<(CpModel, Diagnostics)> {
    cfg.validate()?;
    q.check_dims(x)?;
    q.require_pd()?;
    if k == 0 {
        return Err(HopcaError::arg("number of components must be at least 1"));
    }
    let mut residual = x.clone();
    let mut comps = Vec::with_capacity(k);
    let mut diag = Diagnostics::default();
    for c in 0..k {
        let mut rng = component_rng(cfg, c);
        let comp = gcp_component(&residual, q, lam, cfg, &mut rng, c)?;
        if comp.is_zero() {
            diag.flag(format!("component {} is zero; remaining {} components zero-filled", c + 1, k - c));
            break;
        }
        residual.add_outer(-comp.d, comp.u.as_slice(), comp.v.as_slice(), comp.w.as_slice());
        comps.push(comp);
    }
    Ok(finish_deflation(x.dims(), k, comps, diag, residual.frob_norm()))
}

fn qnorm_lasso_inner(y: &Vector, q: &QuadOperators, mode: Mode, lam: f64) -> Result<Vector> {
    let i = mode.index();
    if q.identity[i] {
        return Ok(y.map(|v| soft_threshold(v, lam)));
    }
    if q.diagonal[i] {
        let m = &q.q[i];
        return Ok(Vector::from_fn(y.len(), |r, _| soft_threshold(y[r], lam / m[(r, r)])));
    }
    Ok(prox_gradient_qlasso(y, &q.q[i], lam))
}

/// `argmin_u ½(y − u)ᵀQ(y − u) + λ‖u‖₁` for positive definite `Q`.
///
/// Diagonal `Q` has the separable solution `uᵢ = S(yᵢ, λ/Qᵢᵢ)`; otherwise
/// accelerated proximal gradient with step `1/L` runs until the KKT residual
/// drops below [`QLASSO_TOL`], followed by an exact solve on the active set.
pub fn qnorm_lasso_solve(y: &Vector, q: &Matrix, lam: f64) -> Result<Vector> {
    check_symmetric("Q", q, 1e-12)?;
    if q.nrows() != y.len() {
        return Err(HopcaError::dim(format!("Q is {}×{}, vector has length {}", q.nrows(), q.ncols(), y.len())));
    }
    if !(lam >= 0.0) || !lam.is_finite() {
        return Err(HopcaError::arg("penalty level must be non-negative"));
    }
    let e = min_eigenvalue(q);
    if !(e > 0.0) {
        return Err(HopcaError::NotPositiveDefinite { name: "Q".into(), min_eig: e });
    }
    if lam == 0.0 {
        return Ok(y.clone());
    }
    if is_diagonal(q) {
        return Ok(Vector::from_fn(y.len(), |r, _| soft_threshold(y[r], lam / q[(r, r)])));
    }
    Ok(prox_gradient_qlasso(y, q, lam))
}

/// Largest KKT violation of `u` for the Q-norm lasso.
pub fn qlasso_kkt_residual(y: &Vector, q: &Matrix, lam: f64, u: &Vector) -> f64 {
    let g = q * (u - y);
    (0..u.len())
        .map(|i| if u[i] == 0.0 { (g[i].abs() - lam).max(0.0) } else { (g[i] + lam * u[i].signum()).abs() })
        .fold(0.0, f64::max)
}

fn prox_gradient_qlasso(y: &Vector, q: &Matrix, lam: f64) -> Vector {
    let l = power_max_eigenvalue(q).max(f64::MIN_POSITIVE);
    let step = 1.0 / l;
    let mut u = y.map(|v| soft_threshold(v, lam * step));
    let mut z = u.clone();
    let mut t = 1.0f64;
    for _ in 0..QLASSO_MAX_ITER {
        let g = q * (&z - y);
        let next = (&z - step * g).map(|v| soft_threshold(v, lam * step));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        // gradient-based restart keeps the iteration monotone in practice
        let restart = (&z - &next).dot(&(&next - &u)) > 0.0;
        z = if restart { next.clone() } else { &next + ((t - 1.0) / t_next) * (&next - &u) };
        t = if restart { 1.0 } else { t_next };
        u = next;
        if let Some(exact) = active_set_refine(y, q, lam, &u) {
            return exact;
        }
        if qlasso_kkt_residual(y, q, lam, &u) <= QLASSO_TOL {
            return u;
        }
    }
    u
}

/// Solves the KKT system on the support and sign pattern of `u`; returns the
/// solution if it keeps that pattern and satisfies the KKT conditions.
fn active_set_refine(y: &Vector, q: &Matrix, lam: f64, u: &Vector) -> Option<Vector> {
    let support: Vec<usize> = (0..u.len()).filter(|&i| u[i] != 0.0).collect();
    let mut out = Vector::zeros(u.len());
    if !support.is_empty() {
        let qy = q * y;
        let qss = Matrix::from_fn(support.len(), support.len(), |a, b| q[(support[a], support[b])]);
        let rhs = Vector::from_fn(support.len(), |a, _| qy[support[a]] - lam * u[support[a]].signum());
        let sol = qss.cholesky()?.solve(&rhs);
        for (a, &i) in support.iter().enumerate() {
            if sol[a] == 0.0 || sol[a].signum() != u[i].signum() {
                return None;
            }
            out[i] = sol[a];
        }
    }
    (qlasso_kkt_residual(y, q, lam, &out) <= QLASSO_TOL).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_threshold_examples() {
        assert_eq!(positive_threshold(3.0, 1.0), 2.0);
        assert_eq!(positive_threshold(-3.0, 1.0), 0.0);
        assert_eq!(positive_threshold(-0.2, 0.0), 0.0);
        assert_eq!(positive_threshold(0.2, 0.0), 0.2);
    }

    #[test]
    fn qlasso_identity_and_zero_level() {
        let y = Vector::from_column_slice(&[2.0, -0.4, -1.5]);
        let i = Matrix::identity(3, 3);
        assert_eq!(qnorm_lasso_solve(&y, &i, 0.5).unwrap().as_slice(), &[1.5, 0.0, -1.0]);
        let q = Matrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 3.0]);
        assert_eq!(qnorm_lasso_solve(&y, &q, 0.0).unwrap(), y);
    }

    #[test]
    fn qlasso_diagonal_closed_form() {
        let y = Vector::from_column_slice(&[2.0, -0.4, -1.5, 0.9]);
        let d = [4.0, 1.0, 0.5, 2.0];
        let q = Matrix::from_diagonal(&Vector::from_column_slice(&d));
        let u = qnorm_lasso_solve(&y, &q, 1.0).unwrap();
        for i in 0..4 {
            assert_eq!(u[i], soft_threshold(y[i], 1.0 / d[i]));
        }
    }

    #[test]
    fn qlasso_rejects_indefinite() {
        let q = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let y = Vector::from_column_slice(&[1.0, 1.0]);
        assert!(matches!(qnorm_lasso_solve(&y, &q, 0.1), Err(HopcaError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn group_prox_zeroes_small_blocks() {
        let g = GroupLasso::contiguous(5, 2).unwrap();
        assert_eq!(g.groups().len(), 3);
        let y = Vector::from_column_slice(&[3.0, 4.0, 0.3, 0.4, 2.0]);
        let p = g.prox(&y, 1.0);
        assert!((p[0] - 2.4).abs() < 1e-15 && (p[1] - 3.2).abs() < 1e-15);
        assert_eq!((p[2], p[3]), (0.0, 0.0));
        assert_eq!(p[4], 1.0);
    }

    #[test]
    fn quad_operators_validation() {
        let bad = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(
            QuadOperators::new(bad, Matrix::identity(2, 2), Matrix::identity(2, 2)),
            Err(HopcaError::NotSymmetric(_))
        ));
        let psd = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let q = QuadOperators::new(psd, Matrix::identity(2, 2), Matrix::identity(2, 2)).unwrap();
        assert!(q.require_pd().is_err());
    }
}
