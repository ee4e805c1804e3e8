//! Multi-way functional PCA: roughness penalties, the rank-one tensor FPCA
//! block updates, and the half-smoothing procedure.

use crate::classic::{finish_deflation, hooi, nnz};
use crate::error::{HopcaError, Result};
use crate::linalg::{check_symmetric, min_eigenvalue, sym_matrix_fn};
use crate::model::{fix_rank_one_signs, ComponentRecord, CpModel, Diagnostics, RankOne, SolverConfig, TuckerModel};
use crate::power::{alternate, component_rng, initial_triple, Step};
use crate::tensor::{mode_mult, Matrix, Mode, Tensor3, Vector};

fn difference_operator(len: usize, stencil: &[f64]) -> Matrix {
    let rows = len + 1 - stencil.len();
    Matrix::from_fn(rows, len, |r, c| if c >= r && c - r < stencil.len() { stencil[c - r] } else { 0.0 })
}

/// `α·DᵀD` for the second-difference operator `D` with stencil `(1, −2, 1)`.
pub fn second_diff_penalty(len: usize, alpha: f64) -> Result<Matrix> {
    diff_penalty(len, alpha, &[1.0, -2.0, 1.0])
}

/// `α·DᵀD` for the fourth-difference operator, stencil `(1, −4, 6, −4, 1)`.
pub fn fourth_diff_penalty(len: usize, alpha: f64) -> Result<Matrix> {
    diff_penalty(len, alpha, &[1.0, -4.0, 6.0, -4.0, 1.0])
}

fn diff_penalty(len: usize, alpha: f64, stencil: &[f64]) -> Result<Matrix> {
    if len < stencil.len() {
        return Err(HopcaError::arg(format!("difference penalty needs length ≥ {}, got {len}", stencil.len())));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(HopcaError::arg(format!("smoothing scale must be non-negative, got {alpha}")));
    }
    let d = difference_operator(len, stencil);
    Ok(alpha * d.transpose() * d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Smoother {
    #[default]
    SecondDifference,
    FourthDifference,
}

/// Per-mode smoothers `S = I + αΩ` with their inverses and inverse square
/// roots. Modes with `αΩ = 0` use the exact identity.
#[derive(Clone, Debug)]
pub struct SmootherSet {
    pub alpha: f64,
    omega: [Matrix; 3],
    s: [Matrix; 3],
    s_inv: [Matrix; 3],
    s_inv_sqrt: [Matrix; 3],
    identity: [bool; 3],
}

impl SmootherSet {
    /// Builds the set from PSD roughness penalties `Ω_u, Ω_v, Ω_w`.
    pub fn new(omega: [Matrix; 3], alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(HopcaError::arg(format!("smoothing scale must be non-negative, got {alpha}")));
        }
        for (i, o) in omega.iter().enumerate() {
            let name = format!("Omega{}", i + 1);
            check_symmetric(&name, o, 1e-12)?;
            let e = min_eigenvalue(o);
            if e < -1e-10 * o.amax().max(1.0) {
                return Err(HopcaError::NotPositiveSemiDefinite { name, min_eig: e });
            }
        }
        let identity = [0, 1, 2].map(|i| alpha == 0.0 || omega[i].iter().all(|v| *v == 0.0));
        let n = omega.clone().map(|o| o.nrows());
        let s = [0, 1, 2].map(|i| Matrix::identity(n[i], n[i]) + alpha * &omega[i]);
        let matfn = |f: fn(f64) -> f64| {
            [0, 1, 2].map(|i| if identity[i] { Matrix::identity(n[i], n[i]) } else { sym_matrix_fn(&s[i], f) })
        };
        let s_inv = matfn(|l| 1.0 / l);
        let s_inv_sqrt = matfn(|l| 1.0 / l.sqrt());
        Ok(SmootherSet { alpha, omega, s, s_inv, s_inv_sqrt, identity })
    }

    /// Difference-penalty smoothers of the given kind on each mode.
    pub fn from_differences(dims: [usize; 3], alpha: f64, kind: Smoother) -> Result<Self> {
        let mut omega: [Matrix; 3] = Default::default();
        for (i, &n) in dims.iter().enumerate() {
            omega[i] = match kind {
                Smoother::SecondDifference => second_diff_penalty(n, 1.0)?,
                Smoother::FourthDifference => fourth_diff_penalty(n, 1.0)?,
            };
        }
        Self::new(omega, alpha)
    }

    /// `S = I` on every mode.
    pub fn identity(dims: [usize; 3]) -> Self {
        Self::new(dims.map(|n| Matrix::zeros(n, n)), 0.0).expect("zero penalties are valid")
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.s[0].nrows(), self.s[1].nrows(), self.s[2].nrows()]
    }

    pub fn omega(&self, mode: Mode) -> &Matrix {
        &self.omega[mode.index()]
    }

    pub fn s(&self, mode: Mode) -> &Matrix {
        &self.s[mode.index()]
    }

    pub fn s_inv(&self, mode: Mode) -> &Matrix {
        &self.s_inv[mode.index()]
    }

    pub fn s_inv_sqrt(&self, mode: Mode) -> &Matrix {
        &self.s_inv_sqrt[mode.index()]
    }

    pub fn is_identity(&self, mode: Mode) -> bool {
        self.identity[mode.index()]
    }

    /// `fᵀSf`.
    pub fn quad(&self, mode: Mode, f: &Vector) -> f64 {
        if self.identity[mode.index()] {
            f.norm_squared()
        } else {
            f.dot(&(&self.s[mode.index()] * f))
        }
    }

    /// `fᵀΩf` (without `α`).
    pub fn roughness(&self, mode: Mode, f: &Vector) -> f64 {
        f.dot(&(&self.omega[mode.index()] * f))
    }

    fn check_dims(&self, x: &Tensor3) -> Result<()> {
        if self.dims() != x.dims() {
            return Err(HopcaError::dim(format!("smoothers {:?} do not match tensor {:?}", self.dims(), x.dims())));
        }
        Ok(())
    }
}

/// `‖x‖² − 2·x ×₁u ×₂v ×₃w + (uᵀS_u u)(vᵀS_v v)(wᵀS_w w)`.
pub fn fpca_objective(x: &Tensor3, s: &SmootherSet, f: &[Vector; 3]) -> f64 {
    let fit = x.contract_all(f[0].as_slice(), f[1].as_slice(), f[2].as_slice());
    let quad: f64 = Mode::ALL.iter().map(|m| s.quad(*m, &f[m.index()])).product();
    x.frob_norm_sq() - 2.0 * fit + quad
}

/// Gradient of [`fpca_objective`] with respect to the `mode` factor.
pub fn fpca_gradient(x: &Tensor3, s: &SmootherSet, f: &[Vector; 3], mode: Mode) -> Vector {
    let c = x.contract_except(mode, f);
    let (a, b) = mode.others();
    let others = s.quad(a, &f[a.index()]) * s.quad(b, &f[b.index()]);
    let sf = if s.is_identity(mode) { f[mode.index()].clone() } else { s.s(mode) * &f[mode.index()] };
    -2.0 * c + 2.0 * others * sf
}

/// Rank-one tensor FPCA fit.
#[derive(Clone, Debug)]
pub struct FpcaRankOne {
    /// Factors as produced by the block updates (scale carried by the
    /// factor updated last).
    pub raw: [Vector; 3],
    /// Equivalent unit-norm factors with weight `d = ‖u‖‖v‖‖w‖`.
    pub unit: RankOne,
}

/// The `mode` block minimizer of [`fpca_objective`]:
/// `S⁻¹ (x contracted with the others) / (product of the others' S-quadratic forms)`.
pub fn fpca_update(x: &Tensor3, s: &SmootherSet, f: &[Vector; 3], mode: Mode) -> Option<Vector> {
    let c = x.contract_except(mode, f);
    let (a, b) = mode.others();
    let others = s.quad(a, &f[a.index()]) * s.quad(b, &f[b.index()]);
    if !(others > 0.0) || c.iter().all(|v| *v == 0.0) {
        return None;
    }
    let sc = if s.is_identity(mode) { c } else { s.s_inv(mode) * c };
    Some(sc / others)
}

/// Rank-one tensor FPCA by cyclic block minimization.
pub fn fpca_rank_one(x: &Tensor3, s: &SmootherSet, cfg: &SolverConfig) -> Result<FpcaRankOne> {
    cfg.validate()?;
    s.check_dims(x)?;
    let mut rng = component_rng(cfg, 0);
    Ok(fpca_component(x, s, cfg, &mut rng, 0))
}

fn fpca_component(
    x: &Tensor3,
    s: &SmootherSet,
    cfg: &SolverConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
    order: usize,
) -> FpcaRankOne {
    let dims = x.dims();
    let zero = |iterations, trace| {
        let z = dims.map(Vector::zeros);
        FpcaRankOne {
            raw: z.clone(),
            unit: RankOne {
                u: z[0].clone(),
                v: z[1].clone(),
                w: z[2].clone(),
                d: 0.0,
                record: ComponentRecord { order, iterations, converged: true, trace, ..Default::default() },
            },
        }
    };
    if x.is_zero() {
        return zero(0, Vec::new());
    }
    let init = initial_triple(x, cfg, rng);
    let run = alternate(
        init,
        cfg,
        |mode, f| match fpca_update(x, s, f, mode) {
            Some(u) => Step::Factor(u),
            None => Step::Zero,
        },
        |f| fpca_objective(x, s, f),
    );
    if run.zeroed.is_some() {
        return zero(run.sweeps, run.trace);
    }
    let raw = run.factors;
    let norms = raw.clone().map(|f| f.norm());
    let [mut u, mut v, mut w] = [0, 1, 2].map(|i| &raw[i] / norms[i]);
    fix_rank_one_signs(&mut u, &mut v, &mut w);
    let d = norms.iter().product::<f64>();
    let record = ComponentRecord {
        order,
        iterations: run.sweeps,
        converged: run.converged,
        d,
        trace: run.trace,
        nnz: [nnz(&u), nnz(&v), nnz(&w)],
        ..Default::default()
    };
    FpcaRankOne { raw, unit: RankOne { u, v, w, d, record } }
}

/// `K` tensor FPCA components by deflation, reported in unit form.
pub fn fpca(x: &Tensor3, k: usize, s: &SmootherSet, cfg: &SolverConfig) -> Result<(CpModel, Diagnostics)> {
    cfg.validate()?;
    s.check_dims(x)?;
    if k == 0 {
        return Err(HopcaError::arg("number of components must be at least 1"));
    }
    let mut residual = x.clone();
    let mut comps = Vec::with_capacity(k);
    let mut diag = Diagnostics::default();
    for c in 0..k {
        let mut rng = component_rng(cfg, c);
        let comp = fpca_component(&residual, s, cfg, &mut rng, c).unit;
        if comp.is_zero() {
            diag.flag(format!("component {} is zero; remaining {} components zero-filled", c + 1, k - c));
            break;
        }
        residual.add_outer(-comp.d, comp.u.as_slice(), comp.v.as_slice(), comp.w.as_slice());
        comps.push(comp);
    }
    Ok(finish_deflation(x.dims(), k, comps, diag, residual.frob_norm()))
}

/// Output of the half-smoothing procedure.
#[derive(Clone, Debug)]
pub struct HalfSmoothing {
    /// Tucker factors mapped back through `S^{-1/2}`, with the core of the
    /// smoothed-data decomposition.
    pub model: TuckerModel,
    /// The Tucker decomposition of the half-smoothed data.
    pub smoothed: TuckerModel,
    pub diagnostics: Diagnostics,
}

/// `x ×₁S_u^{-1/2} ×₂S_v^{-1/2} ×₃S_w^{-1/2}`.
pub fn half_smooth(x: &Tensor3, s: &SmootherSet) -> Result<Tensor3> {
    s.check_dims(x)?;
    let mut t = x.clone();
    for m in Mode::ALL {
        if !s.is_identity(m) {
            t = mode_mult(&t, s.s_inv_sqrt(m), m)?;
        }
    }
    Ok(t)
}

/// Half-smooth the data, take its HOOI decomposition, and map the factors
/// back through `S^{-1/2}`.
pub fn fpca_half_smoothing(x: &Tensor3, s: &SmootherSet, ranks: [usize; 3], cfg: &SolverConfig) -> Result<HalfSmoothing> {
    let xt = half_smooth(x, s)?;
    let (smoothed, diagnostics) = hooi(&xt, ranks, cfg)?;
    let map = |m: Mode, f: &Matrix| if s.is_identity(m) { f.clone() } else { s.s_inv_sqrt(m) * f };
    let model = TuckerModel {
        u: map(Mode::One, &smoothed.u),
        v: map(Mode::Two, &smoothed.v),
        w: map(Mode::Three, &smoothed.w),
        core: smoothed.core.clone(),
    };
    Ok(HalfSmoothing { model, smoothed, diagnostics })
}

/// Rescales the direction `u∘v∘w` to the scale minimizing
/// [`fpca_objective`] along it, split evenly across the three factors.
pub fn fpca_scaled_point(x: &Tensor3, s: &SmootherSet, f: &[Vector; 3]) -> [Vector; 3] {
    let a = x.contract_all(f[0].as_slice(), f[1].as_slice(), f[2].as_slice());
    let b: f64 = Mode::ALL.iter().map(|m| s.quad(*m, &f[m.index()])).product();
    if !(b > 0.0) {
        return f.clone();
    }
    let c = a / b;
    let r = c.abs().cbrt();
    let sign = if c < 0.0 { -1.0 } else { 1.0 };
    [sign * r * &f[0], r * &f[1], r * &f[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_difference_single_row() {
        let m = second_diff_penalty(3, 1.0).unwrap();
        let want = Matrix::from_row_slice(3, 3, &[1.0, -2.0, 1.0, -2.0, 4.0, -2.0, 1.0, -2.0, 1.0]);
        assert_eq!(m, want);
        assert_eq!(second_diff_penalty(5, 0.0).unwrap(), Matrix::zeros(5, 5));
        assert!(second_diff_penalty(2, 1.0).is_err());
    }

    #[test]
    fn constants_have_zero_roughness() {
        for len in [3, 7, 12] {
            let m = second_diff_penalty(len, 2.5).unwrap();
            let c = Vector::from_element(len, 3.7);
            assert!(c.dot(&(&m * &c)).abs() < 1e-10);
        }
        let m = fourth_diff_penalty(9, 1.0).unwrap();
        let c = Vector::from_element(9, -1.3);
        assert!(c.dot(&(&m * &c)).abs() < 1e-10);
    }

    #[test]
    fn smoother_roots_are_consistent() {
        let s = SmootherSet::from_differences([5, 4, 6], 0.7, Smoother::SecondDifference).unwrap();
        for m in Mode::ALL {
            let r = s.s_inv_sqrt(m);
            let err = (r * r * s.s(m) - Matrix::identity(s.dims()[m.index()], s.dims()[m.index()])).amax();
            assert!(err < 1e-12, "{err}");
        }
    }

    #[test]
    fn negative_alpha_rejected() {
        assert!(SmootherSet::from_differences([3, 3, 3], -1.0, Smoother::SecondDifference).is_err());
    }
}
