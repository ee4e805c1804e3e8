//! Projected variance explained and BIC selection of penalty levels.

use crate::error::{HopcaError, Result};
use crate::linalg::{column_span_basis, normalized, EIG_FLOOR};
use crate::model::CpModel;
use crate::sparse::PenaltyKind;
use crate::tensor::{mode_mult, Matrix, Mode, Tensor3, Vector};

/// Number of points in the default λ grid.
pub const DEFAULT_GRID_LEN: usize = 50;
/// Smallest grid value relative to `λ_max`.
pub const DEFAULT_GRID_RATIO: f64 = 1e-3;

/// Cumulative proportion of variance explained by the leading `k` columns of
/// each factor, for `k = 1..=K`.
#[derive(Clone, Debug)]
pub struct VarianceReport {
    pub cumulative: Vec<f64>,
    /// Orthonormal bases of the spans of the leading `k` columns, per mode.
    /// The projection at step `k` is `B Bᵀ`, which equals `U(UᵀU)⁺Uᵀ`.
    pub bases: Vec<[Matrix; 3]>,
}

impl VarianceReport {
    /// The projection matrix used for `mode` at step `k` (1-based).
    pub fn projection(&self, k: usize, mode: Mode) -> Matrix {
        let b = &self.bases[k - 1][mode.index()];
        b * b.transpose()
    }
}

/// `‖x ×₁P_U ×₂P_V ×₃P_W‖² / ‖x‖²` over the leading `k` columns of each factor.
/// Factors with fewer than `k` columns contribute all of their columns.
pub fn variance_explained(x: &Tensor3, factors: [&Matrix; 3], upto_k: usize) -> Result<VarianceReport> {
    for (m, f) in factors.iter().enumerate() {
        if f.nrows() != x.dims()[m] {
            return Err(HopcaError::dim(format!(
                "mode-{} factor has {} rows, tensor has {}",
                m + 1,
                f.nrows(),
                x.dims()[m]
            )));
        }
    }
    let kmax = factors.iter().map(|f| f.ncols()).max().unwrap_or(0);
    if upto_k == 0 || upto_k > kmax {
        return Err(HopcaError::arg(format!("upto_k must lie in 1..={kmax}")));
    }
    let total = x.frob_norm_sq();
    if total == 0.0 {
        return Err(HopcaError::ZeroTensor);
    }
    let mut cumulative = Vec::with_capacity(upto_k);
    let mut bases = Vec::with_capacity(upto_k);
    for k in 1..=upto_k {
        let b: [Matrix; 3] =
            factors.map(|f| column_span_basis(&f.columns(0, k.min(f.ncols())).into_owned(), EIG_FLOOR));
        let ratio = if b.iter().any(|m| m.ncols() == 0) {
            0.0
        } else {
            let t = mode_mult(x, &b[0].transpose(), Mode::One)?;
            let t = mode_mult(&t, &b[1].transpose(), Mode::Two)?;
            let t = mode_mult(&t, &b[2].transpose(), Mode::Three)?;
            (t.frob_norm_sq() / total).clamp(0.0, 1.0)
        };
        cumulative.push(ratio);
        bases.push(b);
    }
    Ok(VarianceReport { cumulative, bases })
}

/// [`variance_explained`] for the factors of a CP model.
pub fn cp_variance_explained(x: &Tensor3, model: &CpModel, upto_k: usize) -> Result<VarianceReport> {
    variance_explained(x, [&model.u, &model.v, &model.w], upto_k)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BicPoint {
    pub lambda: f64,
    pub bic: f64,
    pub nnz: usize,
    pub rss: f64,
}

#[derive(Clone, Debug)]
pub struct BicSelection {
    pub lambda: f64,
    /// One point per grid value, in grid order.
    pub points: Vec<BicPoint>,
}

/// `ln(rss/N) + ln(N)/N · nnz`. The residual is floored at `total_sq·1e-16`
/// so an exact fit stays finite.
pub fn bic_score(rss: f64, total_sq: f64, n_elems: f64, nnz: usize) -> f64 {
    let rss = rss.max(total_sq * 1e-16).max(f64::MIN_POSITIVE);
    (rss / n_elems).ln() + n_elems.ln() / n_elems * nnz as f64
}

/// `n` log-spaced values from `ratio·λ_max` up to `λ_max`, increasing.
pub fn log_grid(lambda_max: f64, n: usize, ratio: f64) -> Vec<f64> {
    if lambda_max <= 0.0 || n == 0 {
        return vec![0.0];
    }
    if n == 1 {
        return vec![lambda_max];
    }
    let lo = (lambda_max * ratio).ln();
    let hi = lambda_max.ln();
    (0..n)
        .map(|i| {
            if i == n - 1 {
                lambda_max
            } else {
                (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// The default BIC grid for a contraction with largest magnitude `lambda_max`.
pub fn default_grid(lambda_max: f64) -> Vec<f64> {
    log_grid(lambda_max, DEFAULT_GRID_LEN, DEFAULT_GRID_RATIO)
}

/// BIC over `grid` for one factor update with pre-threshold vector `c`.
/// For each level the factor is `thr(c, λ)/‖·‖`, its implied weight is
/// `d = uᵀc`, and the residual of the rank-one fit is `total_sq − d²`.
pub fn bic_from_contraction(c: &[f64], kind: PenaltyKind, total_sq: f64, n_elems: f64, grid: &[f64]) -> BicSelection {
    let cv = Vector::from_column_slice(c);
    let points: Vec<BicPoint> = grid
        .iter()
        .map(|&lam| {
            let (rss, nnz) = match normalized(&kind.threshold(&cv, lam)) {
                Some(u) => {
                    let d = u.dot(&cv);
                    (total_sq - d * d, u.iter().filter(|v| **v != 0.0).count())
                }
                None => (total_sq, 0),
            };
            BicPoint { lambda: lam, bic: bic_score(rss, total_sq, n_elems, nnz), nnz, rss }
        })
        .collect();
    let mut best = points.len() - 1;
    for (i, p) in points.iter().enumerate().rev() {
        let better = p.bic < points[best].bic || (p.bic == points[best].bic && p.lambda > points[best].lambda);
        if better {
            best = i;
        }
    }
    BicSelection { lambda: points[best].lambda, points }
}

/// BIC selection for the `mode` update of a rank-one fit to `x`, holding the
/// other two factors of `factors` fixed.
pub fn bic_select(x: &Tensor3, factors: &[Vector; 3], mode: Mode, kind: PenaltyKind, grid: &[f64]) -> Result<BicSelection> {
    if grid.is_empty() {
        return Err(HopcaError::arg("λ grid is empty"));
    }
    if grid.iter().any(|l| !(*l >= 0.0)) {
        return Err(HopcaError::arg("λ grid values must be non-negative"));
    }
    for m in Mode::ALL {
        if m != mode && factors[m.index()].len() != x.dim(m) {
            return Err(HopcaError::dim(format!("mode-{} factor length does not match tensor", m.number())));
        }
    }
    let c = x.contract_except(mode, factors);
    Ok(bic_from_contraction(c.as_slice(), kind, x.frob_norm_sq(), x.len() as f64, grid))
}
