//! Sparse higher-order PCA: the deflation-based Sparse CP-TPA and the three
//! algorithmic baselines (Sparse CP-ALS, Sparse HOSVD, Sparse HOOI).

use rand_chacha::ChaCha8Rng;

use crate::classic::{als_init, cp_residual_norm, finish_deflation, gram_hadamard, mttkrp, nnz, normalize_columns, project_core};
use crate::error::{HopcaError, Result};
use crate::generalized::positive_threshold_vec;
use crate::linalg::{dominant_sign, leading_left_singular, normalized, pinv_sym};
use crate::model::{fix_rank_one_signs, ComponentRecord, CpModel, Diagnostics, RankOne, SolverConfig, TuckerModel};
use crate::power::{alternate, component_rng, direction_change, initial_triple, Step};
use crate::select::{bic_from_contraction, bic_score, default_grid};
use crate::tensor::{matricize, mode_mult, Matrix, Mode, Tensor3, Vector};

/// Selection sweeps run before the penalty levels are frozen.
const SELECTION_SWEEPS: usize = 10;
/// Tolerance of the coordinate-descent LASSO solver.
pub const LASSO_TOL: f64 = 1e-8;

/// `sign(x)·max(|x| − λ, 0)`.
pub fn soft_threshold(x: f64, lam: f64) -> f64 {
    debug_assert!(lam >= 0.0);
    if x > lam {
        x - lam
    } else if x < -lam {
        x + lam
    } else {
        0.0
    }
}

pub fn soft_threshold_vec(x: &Vector, lam: f64) -> Vector {
    x.map(|v| soft_threshold(v, lam))
}

/// Penalty family applied to one mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PenaltyKind {
    None,
    Lasso,
    /// ℓ₁ penalty plus a non-negativity constraint.
    NonnegLasso,
}

impl PenaltyKind {
    /// The thresholding map of this penalty at level `lam`.
    pub fn threshold(self, c: &Vector, lam: f64) -> Vector {
        match self {
            PenaltyKind::None => c.clone(),
            PenaltyKind::Lasso => soft_threshold_vec(c, lam),
            PenaltyKind::NonnegLasso => positive_threshold_vec(c, lam),
        }
    }

    fn l1(self, f: &Vector) -> f64 {
        match self {
            PenaltyKind::None => 0.0,
            _ => f.lp_norm(1),
        }
    }
}

/// How a mode's penalty level is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaChoice {
    Fixed(f64),
    /// Fraction of the smallest level that zeroes the factor, resolved
    /// from the contraction at the first update of each component.
    Relative(f64),
    /// BIC over an explicit, strictly increasing grid.
    Grid(Vec<f64>),
    /// BIC over the default log-spaced grid.
    Bic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModePenalty {
    pub kind: PenaltyKind,
    pub lambda: LambdaChoice,
}

impl ModePenalty {
    pub fn none() -> Self {
        ModePenalty { kind: PenaltyKind::None, lambda: LambdaChoice::Fixed(0.0) }
    }

    pub fn lasso(lam: f64) -> Self {
        ModePenalty { kind: PenaltyKind::Lasso, lambda: LambdaChoice::Fixed(lam) }
    }

    pub fn lasso_bic() -> Self {
        ModePenalty { kind: PenaltyKind::Lasso, lambda: LambdaChoice::Bic }
    }

    pub fn is_none(&self) -> bool {
        self.kind == PenaltyKind::None
    }

    fn selects(&self) -> bool {
        !self.is_none() && matches!(self.lambda, LambdaChoice::Grid(_) | LambdaChoice::Bic)
    }

    fn needs_resolution(&self) -> bool {
        !self.is_none() && !matches!(self.lambda, LambdaChoice::Fixed(_))
    }

    fn fixed_level(&self) -> f64 {
        match (&self.kind, &self.lambda) {
            (PenaltyKind::None, _) => 0.0,
            (_, LambdaChoice::Fixed(l)) => *l,
            _ => 0.0,
        }
    }

    /// Level for this update given the pre-threshold vector `c`.
    fn resolve(&self, c: &[f64], total_sq: f64, n_elems: f64) -> f64 {
        let lmax = c.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        match &self.lambda {
            _ if self.is_none() => 0.0,
            LambdaChoice::Fixed(l) => *l,
            LambdaChoice::Relative(t) => t * lmax,
            LambdaChoice::Grid(g) => bic_from_contraction(c, self.kind, total_sq, n_elems, g).lambda,
            LambdaChoice::Bic => {
                bic_from_contraction(c, self.kind, total_sq, n_elems, &default_grid(lmax)).lambda
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.lambda {
            LambdaChoice::Fixed(l) | LambdaChoice::Relative(l) if !(*l >= 0.0) || !l.is_finite() => {
                Err(HopcaError::arg(format!("penalty level must be non-negative, got {l}")))
            }
            LambdaChoice::Grid(g) => {
                if g.is_empty() {
                    return Err(HopcaError::arg("λ grid is empty"));
                }
                if g.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
                    return Err(HopcaError::arg("λ grid values must be non-negative"));
                }
                if g.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(HopcaError::arg("λ grid must be strictly increasing"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Per-mode penalties for `u`, `v`, `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltySpec {
    pub modes: [ModePenalty; 3],
}

impl PenaltySpec {
    pub fn none() -> Self {
        PenaltySpec { modes: [ModePenalty::none(), ModePenalty::none(), ModePenalty::none()] }
    }

    pub fn lasso(lams: [f64; 3]) -> Self {
        PenaltySpec { modes: lams.map(ModePenalty::lasso) }
    }

    /// BIC-selected lasso on the flagged modes, no penalty elsewhere.
    pub fn lasso_bic_on(modes: [bool; 3]) -> Self {
        PenaltySpec { modes: modes.map(|on| if on { ModePenalty::lasso_bic() } else { ModePenalty::none() }) }
    }

    pub fn with_mode(mut self, mode: Mode, p: ModePenalty) -> Self {
        self.modes[mode.index()] = p;
        self
    }

    pub fn mode(&self, mode: Mode) -> &ModePenalty {
        &self.modes[mode.index()]
    }

    pub fn validate(&self) -> Result<()> {
        self.modes.iter().try_for_each(ModePenalty::validate)
    }
}

fn zero_rank_one(dims: [usize; 3], order: usize, iterations: usize, lambdas: [f64; 3]) -> RankOne {
    RankOne {
        u: Vector::zeros(dims[0]),
        v: Vector::zeros(dims[1]),
        w: Vector::zeros(dims[2]),
        d: 0.0,
        record: ComponentRecord { order, iterations, converged: true, lambdas, ..Default::default() },
    }
}

/// Penalized Sparse CP-TPA objective `x ×₁u ×₂v ×₃w − Σ λₘ‖fₘ‖₁`.
pub fn sparse_cp_tpa_objective(x: &Tensor3, f: &[Vector; 3], kinds: [PenaltyKind; 3], lams: [f64; 3]) -> f64 {
    let fit = x.contract_all(f[0].as_slice(), f[1].as_slice(), f[2].as_slice());
    fit - (0..3).map(|m| lams[m] * kinds[m].l1(&f[m])).sum::<f64>()
}

/// Rank-one Sparse CP-TPA with fixed lasso levels on all three modes.
pub fn sparse_cp_tpa_rank_one(x: &Tensor3, lam: [f64; 3], cfg: &SolverConfig) -> Result<RankOne> {
    sparse_cp_tpa_component(x, &PenaltySpec::lasso(lam), cfg)
}

/// Rank-one Sparse CP-TPA under an arbitrary [`PenaltySpec`].
pub fn sparse_cp_tpa_component(x: &Tensor3, pen: &PenaltySpec, cfg: &SolverConfig) -> Result<RankOne> {
    cfg.validate()?;
    pen.validate()?;
    let mut rng = component_rng(cfg, 0);
    Ok(penalized_component(x, pen, cfg, &mut rng, 0))
}

fn penalized_component(
    x: &Tensor3,
    pen: &PenaltySpec,
    cfg: &SolverConfig,
    rng: &mut ChaCha8Rng,
    order: usize,
) -> RankOne {
    let dims = x.dims();
    let kinds = pen.modes.clone().map(|m| m.kind);
    let mut lams = pen.modes.clone().map(|m| m.fixed_level());
    if x.is_zero() {
        return zero_rank_one(dims, order, 0, lams);
    }
    let mut factors = initial_triple(x, cfg, rng);
    let total_sq = x.frob_norm_sq();
    let n_elems = x.len() as f64;
    let mut selection_sweeps = 0;

    // Resolve relative levels and run BIC selection with the levels free.
    if pen.modes.iter().any(ModePenalty::needs_resolution) {
        let selecting = pen.modes.iter().any(ModePenalty::selects);
        let mut previous: Option<[f64; 3]> = None;
        for sweep in 0..SELECTION_SWEEPS.min(cfg.max_iter) {
            selection_sweeps += 1;
            for mode in Mode::ALL {
                let mp = pen.mode(mode);
                let c = x.contract_except(mode, &factors);
                if mp.selects() || (sweep == 0 && mp.needs_resolution()) {
                    lams[mode.index()] = mp.resolve(c.as_slice(), total_sq, n_elems);
                }
                match normalized(&mp.kind.threshold(&c, lams[mode.index()])) {
                    Some(f) => factors[mode.index()] = f,
                    None => return zero_rank_one(dims, order, selection_sweeps, lams),
                }
            }
            if !selecting || previous == Some(lams) {
                break;
            }
            previous = Some(lams);
        }
    }

    let run = alternate(
        factors,
        cfg,
        |mode, f| {
            let c = x.contract_except(mode, f);
            let t = kinds[mode.index()].threshold(&c, lams[mode.index()]);
            match normalized(&t) {
                Some(t) => Step::Factor(t),
                None => Step::Zero,
            }
        },
        |f| sparse_cp_tpa_objective(x, f, kinds, lams),
    );
    if run.zeroed.is_some() {
        let mut z = zero_rank_one(dims, order, selection_sweeps + run.sweeps, lams);
        z.record.trace = run.trace;
        return z;
    }
    let [mut u, mut v, mut w] = run.factors;
    fix_rank_one_signs(&mut u, &mut v, &mut w);
    let d = x.contract_all(u.as_slice(), v.as_slice(), w.as_slice()).max(0.0);
    let record = ComponentRecord {
        order,
        iterations: selection_sweeps + run.sweeps,
        converged: run.converged,
        d,
        trace: run.trace,
        lambdas: lams,
        nnz: [nnz(&u), nnz(&v), nnz(&w)],
        restarts: 0,
    };
    RankOne { u, v, w, d, record }
}

/// Sparse CP-TPA: greedy penalized rank-one fits on the running residual.
/// Components are sorted by descending weight; a zero component ends the
/// deflation and the remaining columns stay zero.
pub fn sparse_cp_tpa(x: &Tensor3, k: usize, pen: &PenaltySpec, cfg: &SolverConfig) -> Result<(CpModel, Diagnostics)> {
    cfg.validate()?;
    pen.validate()?;
    if k == 0 {
        return Err(HopcaError::arg("number of components must be at least 1"));
    }
    let mut residual = x.clone();
    let mut comps = Vec::with_capacity(k);
    let mut diag = Diagnostics::default();
    for c in 0..k {
        let mut rng = component_rng(cfg, c);
        let comp = penalized_component(&residual, pen, cfg, &mut rng, c);
        if comp.is_zero() {
            diag.flag(format!("component {} is zero; remaining {} components zero-filled", c + 1, k - c));
            break;
        }
        residual.add_outer(-comp.d, comp.u.as_slice(), comp.v.as_slice(), comp.w.as_slice());
        comps.push(comp);
    }
    Ok(finish_deflation(x.dims(), k, comps, diag, residual.frob_norm()))
}

/// Cyclic coordinate descent for `min ½ zᵀGz − bᵀz + λ‖z‖₁` (optionally
/// with `z ≥ 0`). Stops when no coordinate moves by more than `tol`.
pub fn lasso_cd(g: &Matrix, b: &[f64], lam: f64, nonneg: bool, start: Option<&[f64]>, tol: f64) -> Vector {
    let k = b.len();
    let mut z = start.map(Vector::from_column_slice).unwrap_or_else(|| Vector::zeros(k));
    for _ in 0..10_000 {
        let mut moved = 0.0f64;
        for j in 0..k {
            let gjj = g[(j, j)];
            let old = z[j];
            let new = if gjj <= 0.0 {
                0.0
            } else {
                let mut r = b[j];
                for l in 0..k {
                    if l != j {
                        r -= g[(j, l)] * z[l];
                    }
                }
                let t = if nonneg { (r - lam).max(0.0) } else { soft_threshold(r, lam) };
                t / gjj
            };
            z[j] = new;
            moved = moved.max((new - old).abs());
        }
        if moved <= tol {
            break;
        }
    }
    z
}

/// One Sparse CP-ALS factor update: for each row solves
/// `min ½‖X₍ₘ₎ − Û·KRᵀ‖² + λ‖Û‖₁` in Gram form, with the other two factors
/// held fixed. Returns the unnormalized `Û`.
pub fn lasso_factor_update(x: &Tensor3, mode: Mode, factors: &[Matrix; 3], lam: f64, nonneg: bool) -> Matrix {
    let b = mttkrp(x, mode, factors);
    let g = gram_hadamard(mode, factors);
    lasso_rows(&b, &g, lam, nonneg, None)
}

fn lasso_rows(b: &Matrix, g: &Matrix, lam: f64, nonneg: bool, warm: Option<&Matrix>) -> Matrix {
    let mut out = Matrix::zeros(b.nrows(), b.ncols());
    for r in 0..b.nrows() {
        let row: Vec<f64> = b.row(r).iter().copied().collect();
        let start: Option<Vec<f64>> = warm.map(|w| w.row(r).iter().copied().collect());
        let z = lasso_cd(g, &row, lam, nonneg, start.as_deref(), LASSO_TOL);
        out.set_row(r, &z.transpose());
    }
    out
}

/// `‖X‖² − 2⟨Û, B⟩ + Σᵢ ûᵢᵀ G ûᵢ`, the squared residual of a scaled factor.
fn als_rss(total_sq: f64, scaled: &Matrix, b: &Matrix, g: &Matrix) -> f64 {
    let cross = scaled.component_mul(b).sum();
    let quad = (scaled * g).component_mul(scaled).sum();
    total_sq - 2.0 * cross + quad
}

/// Sparse CP-ALS: CP-ALS with every least-squares update replaced by a LASSO
/// update. The scheme has no coherent objective, so iterations are capped
/// and the residual trace is reported without any monotonicity claim.
pub fn sparse_cp_als(x: &Tensor3, k: usize, pen: &PenaltySpec, cfg: &SolverConfig) -> Result<(CpModel, Diagnostics)> {
    cfg.validate()?;
    pen.validate()?;
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
    let total_sq = norm_x * norm_x;
    let n_elems = x.len() as f64;
    let mut factors = als_init(x, k, cfg);
    let mut d = vec![1.0; k];
    let mut lams = pen.modes.clone().map(|m| m.fixed_level());
    let mut resolved = [false; 3];
    let mut prev_fit = f64::INFINITY;
    for sweep in 1..=cfg.max_iter {
        for mode in Mode::ALL {
            let mp = pen.mode(mode);
            let b = mttkrp(x, mode, &factors);
            let g = gram_hadamard(mode, &factors);
            let mi = mode.index();
            let warm = &factors[mi] * Matrix::from_diagonal(&Vector::from_column_slice(&d));
            let mut scaled = match (&mp.kind, &mp.lambda) {
                (PenaltyKind::None, _) => b * pinv_sym(&g, 1e-12).0,
                (kind, LambdaChoice::Grid(_) | LambdaChoice::Bic) => {
                    let grid = match &mp.lambda {
                        LambdaChoice::Grid(g) => g.clone(),
                        _ => default_grid(b.amax()),
                    };
                    let nonneg = *kind == PenaltyKind::NonnegLasso;
                    let mut best: Option<(f64, f64, Matrix)> = None;
                    let mut start = warm.clone();
                    // descending λ with warm starts; ties keep the larger λ
                    for &lam in grid.iter().rev() {
                        let sol = lasso_rows(&b, &g, lam, nonneg, Some(&start));
                        let rss = als_rss(total_sq, &sol, &b, &g);
                        let nz = sol.iter().filter(|v| **v != 0.0).count();
                        let score = bic_score(rss, total_sq, n_elems, nz);
                        if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
                            best = Some((score, lam, sol.clone()));
                        }
                        start = sol;
                    }
                    let (_, lam, sol) = best.expect("grid is non-empty");
                    lams[mi] = lam;
                    sol
                }
                (kind, choice) => {
                    if let (LambdaChoice::Relative(t), false) = (choice, resolved[mi]) {
                        lams[mi] = t * b.amax();
                        resolved[mi] = true;
                    }
                    lasso_rows(&b, &g, lams[mi], *kind == PenaltyKind::NonnegLasso, Some(&warm))
                }
            };
            d = normalize_columns(&mut scaled);
            factors[mi] = scaled;
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
    if !diag.converged {
        diag.flag(format!("stopped at max_iter={} without stalling", cfg.max_iter));
    }
    let [u, v, w] = factors;
    let mut model = CpModel { u, v, w, d };
    for c in 0..k {
        if model.d[c] == 0.0 {
            for m in Mode::ALL {
                model.factor_mut(m).column_mut(c).fill(0.0);
            }
        }
    }
    model.sort_descending();
    model.fix_signs();
    let fit = diag.trace.last().copied().unwrap_or(norm_x);
    let eq2 = 0.5 * fit * fit
        + Mode::ALL.iter().map(|m| lams[m.index()] * model.factor(*m).lp_norm(1)).sum::<f64>();
    diag.objective = fit;
    diag.note("penalized_objective", format!("{eq2:.17e}"));
    diag.note("lambdas", format!("{:e},{:e},{:e}", lams[0], lams[1], lams[2]));
    Ok((model, diag))
}

/// One rank-one sparse principal component of a matrix.
#[derive(Clone, Debug)]
pub struct SparsePc {
    pub u: Vector,
    pub v: Vector,
    pub d: f64,
    pub iterations: usize,
    pub converged: bool,
    pub lambda: f64,
}

/// Scale information that lets BIC be computed in the full tensor space when
/// the factored matrix is a projection of the tensor.
#[derive(Clone, Copy, Debug)]
pub struct BicContext {
    /// Squared norm of the tensor not represented in the matrix.
    pub extra_sq: f64,
    /// Number of tensor entries.
    pub n_elems: f64,
}

/// Rank-one penalized SVD by alternating soft-thresholding:
/// `u ← S(m v, λₗ)/‖·‖`, `v ← S(mᵀu, λᵣ)/‖·‖`.
pub fn sparse_pca_rank_one(m: &Matrix, lam_left: f64, lam_right: f64, cfg: &SolverConfig) -> Result<SparsePc> {
    cfg.validate()?;
    if !(lam_left >= 0.0 && lam_right >= 0.0) {
        return Err(HopcaError::arg("penalty levels must be non-negative"));
    }
    let ctx = BicContext { extra_sq: 0.0, n_elems: (m.nrows() * m.ncols()) as f64 };
    Ok(sparse_pc_component(m, &ModePenalty::lasso(lam_left), lam_right, cfg, ctx))
}

fn sparse_pc_component(m: &Matrix, left: &ModePenalty, lam_right: f64, cfg: &SolverConfig, ctx: BicContext) -> SparsePc {
    let zero = |iterations, lambda| SparsePc {
        u: Vector::zeros(m.nrows()),
        v: Vector::zeros(m.ncols()),
        d: 0.0,
        iterations,
        converged: true,
        lambda,
    };
    if m.iter().all(|v| *v == 0.0) {
        return zero(0, left.fixed_level());
    }
    let total_sq = m.norm_squared() + ctx.extra_sq;
    let mut v = leading_left_singular(&m.transpose(), 1).vectors.column(0).into_owned();
    let mut u = Vector::zeros(m.nrows());
    let mut lam = left.fixed_level();
    let mut iterations = 0;
    let right = |u: &Vector| normalized(&soft_threshold_vec(&m.tr_mul(u), lam_right));

    if left.needs_resolution() {
        let mut previous = None;
        for sweep in 0..SELECTION_SWEEPS.min(cfg.max_iter) {
            iterations += 1;
            let c = m * &v;
            if left.selects() || sweep == 0 {
                lam = left.resolve(c.as_slice(), total_sq, ctx.n_elems);
            }
            u = match normalized(&left.kind.threshold(&c, lam)) {
                Some(u) => u,
                None => return zero(iterations, lam),
            };
            v = match right(&u) {
                Some(v) => v,
                None => return zero(iterations, lam),
            };
            if !left.selects() || previous == Some(lam) {
                break;
            }
            previous = Some(lam);
        }
    }

    let mut converged = false;
    while iterations < cfg.max_iter + SELECTION_SWEEPS {
        iterations += 1;
        let (u_old, v_old) = (u.clone(), v.clone());
        u = match normalized(&left.kind.threshold(&(m * &v), lam)) {
            Some(u) => u,
            None => return zero(iterations, lam),
        };
        v = match right(&u) {
            Some(v) => v,
            None => return zero(iterations, lam),
        };
        if direction_change(&u, &u_old).max(direction_change(&v, &v_old)) < cfg.tol {
            converged = true;
            break;
        }
    }
    if dominant_sign(u.as_slice()) < 0.0 {
        u.neg_mut();
        v.neg_mut();
    }
    let d = u.dot(&(m * &v)).max(0.0);
    SparsePc { u, v, d, iterations, converged, lambda: lam }
}

/// `k` sparse principal components with rank-one deflation
/// `m ← m − d·u·vᵀ`. Returns the left vectors as columns.
pub fn sparse_pca(
    m: &Matrix,
    k: usize,
    left: &ModePenalty,
    lam_right: f64,
    cfg: &SolverConfig,
    ctx: BicContext,
) -> (Matrix, Vec<SparsePc>) {
    let mut residual = m.clone();
    let mut out = Matrix::zeros(m.nrows(), k);
    let mut pcs = Vec::with_capacity(k);
    for c in 0..k {
        let pc = sparse_pc_component(&residual, left, lam_right, cfg, ctx);
        if pc.d > 0.0 {
            residual -= pc.d * &pc.u * pc.v.transpose();
        }
        out.set_column(c, &pc.u);
        pcs.push(pc);
    }
    (out, pcs)
}

fn check_ranks(x: &Tensor3, ranks: [usize; 3]) -> Result<()> {
    for (m, (&r, &d)) in ranks.iter().zip(x.dims().iter()).enumerate() {
        if r == 0 || r > d {
            return Err(HopcaError::arg(format!("rank {r} for mode {} must lie in 1..={d}", m + 1)));
        }
    }
    Ok(())
}

fn record_pcs(diag: &mut Diagnostics, prefix: &str, mode: Mode, pcs: &[SparsePc]) {
    for (c, pc) in pcs.iter().enumerate() {
        diag.note(
            format!("{prefix}mode{}.component{}", mode.number(), c + 1),
            format!("lambda={:e} nnz={} d={:e} iterations={}", pc.lambda, nnz(&pc.u), pc.d, pc.iterations),
        );
    }
}

/// Sparse HOSVD: each factor holds sparse principal components of the
/// corresponding unfolding. Orthonormality is not enforced.
pub fn sparse_hosvd(x: &Tensor3, ranks: [usize; 3], pen: &PenaltySpec, cfg: &SolverConfig) -> Result<(TuckerModel, Diagnostics)> {
    cfg.validate()?;
    pen.validate()?;
    check_ranks(x, ranks)?;
    let mut diag = Diagnostics::default();
    let ctx = BicContext { extra_sq: 0.0, n_elems: x.len() as f64 };
    let mut factors: [Matrix; 3] = Default::default();
    for mode in Mode::ALL {
        let (f, pcs) = sparse_pca(&matricize(x, mode), ranks[mode.index()], pen.mode(mode), 0.0, cfg, ctx);
        diag.iterations += pcs.iter().map(|p| p.iterations).sum::<usize>();
        record_pcs(&mut diag, "", mode, &pcs);
        factors[mode.index()] = f;
    }
    let [u, v, w] = factors;
    let core = project_core(x, &u, &v, &w)?;
    diag.objective = core.frob_norm();
    diag.converged = true;
    Ok((TuckerModel { u, v, w, core }, diag))
}

/// Sparse HOOI: HOOI with each per-mode SVD replaced by sparse principal
/// components of the projected unfolding. Convergence is not guaranteed, so
/// the sweep with the largest `‖core‖` is returned and the trace reported.
pub fn sparse_hooi(x: &Tensor3, ranks: [usize; 3], pen: &PenaltySpec, cfg: &SolverConfig) -> Result<(TuckerModel, Diagnostics)> {
    let (start, mut diag) = sparse_hosvd(x, ranks, pen, cfg)?;
    let norm_x = x.frob_norm();
    let total_sq = norm_x * norm_x;
    let n_elems = x.len() as f64;
    let mut factors = [start.u.clone(), start.v.clone(), start.w.clone()];
    let mut best = start;
    let mut best_norm = best.core.frob_norm();
    let mut prev = best_norm;
    diag.trace.push(prev);
    diag.iterations = 0;
    diag.converged = norm_x == 0.0;
    if norm_x > 0.0 {
        for sweep in 1..=cfg.max_iter {
            for mode in Mode::ALL {
                let (a, b) = mode.others();
                let t = mode_mult(x, &factors[a.index()].transpose(), a)?;
                let t = mode_mult(&t, &factors[b.index()].transpose(), b)?;
                let m = matricize(&t, mode);
                let ctx = BicContext { extra_sq: (total_sq - m.norm_squared()).max(0.0), n_elems };
                let (f, pcs) = sparse_pca(&m, ranks[mode.index()], pen.mode(mode), 0.0, cfg, ctx);
                if sweep == cfg.max_iter {
                    record_pcs(&mut diag, "final.", mode, &pcs);
                }
                factors[mode.index()] = f;
            }
            let core = project_core(x, &factors[0], &factors[1], &factors[2])?;
            let now = core.frob_norm();
            diag.trace.push(now);
            diag.iterations = sweep;
            if now > best_norm {
                best_norm = now;
                best = TuckerModel { u: factors[0].clone(), v: factors[1].clone(), w: factors[2].clone(), core };
            }
            if (now - prev).abs() / norm_x < cfg.tol {
                diag.converged = true;
                break;
            }
            prev = now;
        }
    }
    if !diag.converged {
        diag.flag(format!("no stall within max_iter={}; returning the best sweep", cfg.max_iter));
    }
    diag.objective = best_norm;
    Ok((best, diag))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-2.5, 1.0), -1.5);
        assert_eq!(soft_threshold(0.7, 0.0), 0.7);
    }

    #[test]
    fn lasso_cd_orthogonal_design_is_soft_threshold() {
        let g = Matrix::identity(3, 3);
        let b = [2.0, -0.3, -1.5];
        let z = lasso_cd(&g, &b, 0.5, false, None, 1e-12);
        assert_eq!(z.as_slice(), &[1.5, 0.0, -1.0]);
        let z = lasso_cd(&g, &b, 0.5, true, None, 1e-12);
        assert_eq!(z.as_slice(), &[1.5, 0.0, 0.0]);
    }

    #[test]
    fn sparse_pca_on_diagonal() {
        let m = Matrix::from_diagonal(&Vector::from_column_slice(&[5.0, 2.0]));
        let pc = sparse_pca_rank_one(&m, 0.0, 0.0, &SolverConfig::default()).unwrap();
        assert!((pc.d - 5.0).abs() < 1e-12);
        assert!((pc.u[0].abs() - 1.0).abs() < 1e-12 && (pc.v[0].abs() - 1.0).abs() < 1e-12);
        let pc = sparse_pca_rank_one(&m, 5.0 * 2.0, 0.0, &SolverConfig::default()).unwrap();
        assert_eq!(pc.d, 0.0);
        assert!(pc.u.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn grid_validation() {
        assert!(ModePenalty { kind: PenaltyKind::Lasso, lambda: LambdaChoice::Grid(vec![0.1, 0.1]) }.validate().is_err());
        assert!(ModePenalty { kind: PenaltyKind::Lasso, lambda: LambdaChoice::Grid(vec![]) }.validate().is_err());
        assert!(ModePenalty::lasso(-1.0).validate().is_err());
        assert!(ModePenalty { kind: PenaltyKind::Lasso, lambda: LambdaChoice::Grid(vec![0.0, 1.0]) }.validate().is_ok());
    }
}
