use crate::error::{HopcaError, Result};
use crate::linalg::dominant_sign;
use crate::tensor::{mode_mult, Matrix, Mode, Tensor3, Vector};

/// How factor iterations are started.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    /// Leading singular vectors of the matricizations.
    Hosvd,
    /// Seeded Gaussian directions.
    Random,
}

/// Iteration controls shared by every solver.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Convergence threshold; see each solver for the quantity it bounds.
    pub tol: f64,
    pub seed: u64,
    pub init: Init,
    /// Gram-Schmidt orthogonalization of Tensor Power Algorithm components.
    pub orthogonalize: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { max_iter: 500, tol: 1e-6, seed: 0, init: Init::Hosvd, orthogonalize: false }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(HopcaError::arg("max_iter must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(HopcaError::arg("tol must be positive"));
        }
        Ok(())
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Record of one rank-one solve inside a deflation sequence.
#[derive(Clone, Debug, Default)]
pub struct ComponentRecord {
    /// Position in the greedy computation order.
    pub order: usize,
    pub iterations: usize,
    pub converged: bool,
    pub d: f64,
    /// Objective after every factor update.
    pub trace: Vec<f64>,
    pub lambdas: [f64; 3],
    pub nnz: [usize; 3],
    pub restarts: usize,
}

/// Per-run diagnostics: iteration counts, objective traces and flags.
#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    /// Sweep-level objective trace (for ALS/HOOI-style solvers).
    pub trace: Vec<f64>,
    pub components: Vec<ComponentRecord>,
    pub flags: Vec<String>,
    pub extra: Vec<(String, String)>,
}

impl Diagnostics {
    pub fn flag(&mut self, msg: impl Into<String>) {
        self.flags.push(msg.into());
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.extra.push((key.into(), value.to_string()));
    }

    /// Flat `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("iterations={}\n", self.iterations));
        out.push_str(&format!("objective={:.16e}\n", self.objective));
        out.push_str(&format!("converged={}\n", self.converged));
        for c in &self.components {
            let p = format!("component.{}", c.order + 1);
            out.push_str(&format!("{p}.iterations={}\n", c.iterations));
            out.push_str(&format!("{p}.converged={}\n", c.converged));
            out.push_str(&format!("{p}.d={:.16e}\n", c.d));
            out.push_str(&format!(
                "{p}.lambdas={:.16e},{:.16e},{:.16e}\n",
                c.lambdas[0], c.lambdas[1], c.lambdas[2]
            ));
            out.push_str(&format!("{p}.nnz={},{},{}\n", c.nnz[0], c.nnz[1], c.nnz[2]));
            if c.restarts > 0 {
                out.push_str(&format!("{p}.restarts={}\n", c.restarts));
            }
        }
        for (k, v) in &self.extra {
            out.push_str(&format!("{k}={v}\n"));
        }
        for (i, f) in self.flags.iter().enumerate() {
            out.push_str(&format!("flag.{}={}\n", i + 1, f.replace('\n', " ")));
        }
        out
    }
}

/// Result of a single rank-one fit `d · u∘v∘w`.
#[derive(Clone, Debug)]
pub struct RankOne {
    pub u: Vector,
    pub v: Vector,
    pub w: Vector,
    pub d: f64,
    pub record: ComponentRecord,
}

impl RankOne {
    pub fn factors(&self) -> [&Vector; 3] {
        [&self.u, &self.v, &self.w]
    }

    pub fn is_zero(&self) -> bool {
        self.d == 0.0
    }
}

/// CP-style factorization `Σₖ dₖ uₖ∘vₖ∘wₖ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CpModel {
    pub u: Matrix,
    pub v: Matrix,
    pub w: Matrix,
    pub d: Vec<f64>,
}

impl CpModel {
    pub fn new(u: Matrix, v: Matrix, w: Matrix, d: Vec<f64>) -> Result<Self> {
        let k = d.len();
        if u.ncols() != k || v.ncols() != k || w.ncols() != k {
            return Err(HopcaError::dim(format!(
                "factor column counts {}/{}/{} do not match {k} weights",
                u.ncols(),
                v.ncols(),
                w.ncols()
            )));
        }
        Ok(CpModel { u, v, w, d })
    }

    pub fn zeros(dims: [usize; 3], k: usize) -> Self {
        CpModel {
            u: Matrix::zeros(dims[0], k),
            v: Matrix::zeros(dims[1], k),
            w: Matrix::zeros(dims[2], k),
            d: vec![0.0; k],
        }
    }

    pub fn from_components(dims: [usize; 3], comps: &[RankOne]) -> Self {
        let mut m = CpModel::zeros(dims, comps.len());
        for (k, c) in comps.iter().enumerate() {
            m.u.set_column(k, &c.u);
            m.v.set_column(k, &c.v);
            m.w.set_column(k, &c.w);
            m.d[k] = c.d;
        }
        m
    }

    pub fn k(&self) -> usize {
        self.d.len()
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.u.nrows(), self.v.nrows(), self.w.nrows()]
    }

    pub fn factor(&self, mode: Mode) -> &Matrix {
        match mode {
            Mode::One => &self.u,
            Mode::Two => &self.v,
            Mode::Three => &self.w,
        }
    }

    pub fn factor_mut(&mut self, mode: Mode) -> &mut Matrix {
        match mode {
            Mode::One => &mut self.u,
            Mode::Two => &mut self.v,
            Mode::Three => &mut self.w,
        }
    }

    pub fn component(&self, k: usize) -> [Vector; 3] {
        [self.u.column(k).into_owned(), self.v.column(k).into_owned(), self.w.column(k).into_owned()]
    }

    /// First `k` components only.
    pub fn truncated(&self, k: usize) -> CpModel {
        let k = k.min(self.k());
        CpModel {
            u: self.u.columns(0, k).into_owned(),
            v: self.v.columns(0, k).into_owned(),
            w: self.w.columns(0, k).into_owned(),
            d: self.d[..k].to_vec(),
        }
    }

    pub fn select(&self, cols: &[usize]) -> CpModel {
        CpModel {
            u: self.u.select_columns(cols),
            v: self.v.select_columns(cols),
            w: self.w.select_columns(cols),
            d: cols.iter().map(|&c| self.d[c]).collect(),
        }
    }

    pub fn reconstruct(&self) -> Tensor3 {
        let mut t = Tensor3::zeros(self.dims());
        for k in 0..self.k() {
            t.add_outer(
                self.d[k],
                self.u.column(k).as_slice(),
                self.v.column(k).as_slice(),
                self.w.column(k).as_slice(),
            );
        }
        t
    }

    /// Makes the largest-magnitude entry of each `u` and `v` column positive;
    /// `w` absorbs the parity so the represented tensor is unchanged.
    pub fn fix_signs(&mut self) {
        for k in 0..self.k() {
            let su = dominant_sign(self.u.column(k).as_slice());
            let sv = dominant_sign(self.v.column(k).as_slice());
            if su < 0.0 {
                self.u.column_mut(k).neg_mut();
            }
            if sv < 0.0 {
                self.v.column_mut(k).neg_mut();
            }
            if su * sv < 0.0 {
                self.w.column_mut(k).neg_mut();
            }
        }
    }

    /// Reorders components by descending weight; returns the permutation
    /// (new position → old index).
    pub fn sort_descending(&mut self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.k()).collect();
        order.sort_by(|&a, &b| self.d[b].total_cmp(&self.d[a]));
        *self = self.select(&order);
        order
    }

    /// Every column has unit norm or is exactly zero.
    pub fn columns_unit_or_zero(&self, tol: f64) -> bool {
        [&self.u, &self.v, &self.w].iter().all(|m| {
            m.column_iter().all(|c| {
                let n = c.norm();
                n == 0.0 || (n - 1.0).abs() <= tol
            })
        })
    }
}

/// Applies the sign convention to a rank-one triple in place (see
/// [`CpModel::fix_signs`]).
pub(crate) fn fix_rank_one_signs(u: &mut Vector, v: &mut Vector, w: &mut Vector) {
    let su = dominant_sign(u.as_slice());
    let sv = dominant_sign(v.as_slice());
    if su < 0.0 {
        u.neg_mut();
    }
    if sv < 0.0 {
        v.neg_mut();
    }
    if su * sv < 0.0 {
        w.neg_mut();
    }
}

/// Tucker factorization `core ×₁ U ×₂ V ×₃ W`. Produced with orthonormal
/// factors by HOSVD/HOOI; the sparse variants reuse the type without that
/// guarantee.
#[derive(Clone, Debug, PartialEq)]
pub struct TuckerModel {
    pub u: Matrix,
    pub v: Matrix,
    pub w: Matrix,
    pub core: Tensor3,
}

impl TuckerModel {
    pub fn ranks(&self) -> [usize; 3] {
        self.core.dims()
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.u.nrows(), self.v.nrows(), self.w.nrows()]
    }

    pub fn factor(&self, mode: Mode) -> &Matrix {
        match mode {
            Mode::One => &self.u,
            Mode::Two => &self.v,
            Mode::Three => &self.w,
        }
    }

    pub fn reconstruct(&self) -> Tensor3 {
        let t = mode_mult(&self.core, &self.u, Mode::One).expect("tucker dims");
        let t = mode_mult(&t, &self.v, Mode::Two).expect("tucker dims");
        mode_mult(&t, &self.w, Mode::Three).expect("tucker dims")
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        [&self.u, &self.v, &self.w].iter().all(|m| {
            let g = m.transpose() * *m;
            (g - Matrix::identity(m.ncols(), m.ncols())).amax() <= tol
        })
    }

    /// Factor columns viewed as CP components (`d` = diagonal of the core),
    /// used for support metrics. Components beyond the smallest rank are
    /// dropped.
    pub fn as_cp_columns(&self) -> CpModel {
        let [a, b, c] = self.ranks();
        let k = a.min(b).min(c);
        CpModel {
            u: self.u.columns(0, k).into_owned(),
            v: self.v.columns(0, k).into_owned(),
            w: self.w.columns(0, k).into_owned(),
            d: (0..k).map(|i| self.core.get(i, i, i).abs()).collect(),
        }
    }
}

/// Either model family, for code that only needs reconstruction or factors.
#[derive(Clone, Debug, PartialEq)]
pub enum FittedModel {
    Cp(CpModel),
    Tucker(TuckerModel),
}

impl FittedModel {
    pub fn reconstruct(&self) -> Tensor3 {
        match self {
            FittedModel::Cp(m) => m.reconstruct(),
            FittedModel::Tucker(m) => m.reconstruct(),
        }
    }

    pub fn factor(&self, mode: Mode) -> &Matrix {
        match self {
            FittedModel::Cp(m) => m.factor(mode),
            FittedModel::Tucker(m) => m.factor(mode),
        }
    }

    /// CP view used for component matching.
    pub fn cp_view(&self) -> CpModel {
        match self {
            FittedModel::Cp(m) => m.clone(),
            FittedModel::Tucker(m) => m.as_cp_columns(),
        }
    }
}
