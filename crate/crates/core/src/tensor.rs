//! Dense third-order tensors and the multilinear primitives shared by every
//! decomposition.
//!
//! Storage is a flat `Vec<f64>` with the mode-1 index fastest: entry
//! `(i, j, k)` of an `n × p × q` tensor lives at `i + n*j + n*p*k`.
//! Matricizations follow the same fiber ordering:
//!
//! * mode 1: `n × pq`, entry `(i, j + p*k)`
//! * mode 2: `p × nq`, entry `(j, i + n*k)`
//! * mode 3: `q × np`, entry `(k, i + n*j)`
//!
//! With this convention `X₍₁₎` is the tensor buffer read column-major, and
//! `x ×₂ v ×₃ w = X₍₁₎ · khatri_rao(w, v)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{HopcaError, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// One of the three tensor modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    One,
    Two,
    Three,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::One, Mode::Two, Mode::Three];

    pub fn index(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 1,
            Mode::Three => 2,
        }
    }

    /// Parses the 1-based mode number used on the command line and in files.
    pub fn from_number(n: usize) -> Result<Mode> {
        match n {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            3 => Ok(Mode::Three),
            _ => Err(HopcaError::arg(format!("mode must be 1, 2 or 3, got {n}"))),
        }
    }

    pub fn number(self) -> usize {
        self.index() + 1
    }

    /// The two remaining modes, in increasing order.
    pub fn others(self) -> (Mode, Mode) {
        match self {
            Mode::One => (Mode::Two, Mode::Three),
            Mode::Two => (Mode::One, Mode::Three),
            Mode::Three => (Mode::One, Mode::Two),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Dense `n × p × q` array of finite reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Tensor3 {
    /// Builds a tensor from its flat buffer (mode-1 index fastest).
    pub fn new(dims: [usize; 3], data: Vec<f64>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(HopcaError::dim(format!("dimensions must be positive, got {dims:?}")));
        }
        let len = dims[0] * dims[1] * dims[2];
        if data.len() != len {
            return Err(HopcaError::dim(format!(
                "expected {len} values for dims {dims:?}, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(HopcaError::NonFinite(pos));
        }
        Ok(Tensor3 { dims, data })
    }

    pub fn zeros(dims: [usize; 3]) -> Self {
        assert!(dims.iter().all(|&d| d > 0), "dimensions must be positive");
        Tensor3 { dims, data: vec![0.0; dims[0] * dims[1] * dims[2]] }
    }

    /// Builds a tensor entrywise; panics if `f` returns a non-finite value.
    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Tensor3::zeros(dims);
        let [n, p, q] = dims;
        for k in 0..q {
            for j in 0..p {
                for i in 0..n {
                    let v = f(i, j, k);
                    assert!(v.is_finite(), "non-finite entry at ({i}, {j}, {k})");
                    t.data[i + n * j + n * p * k] = v;
                }
            }
        }
        t
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn dim(&self, mode: Mode) -> usize {
        self.dims[mode.index()]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        assert!(value.is_finite(), "non-finite entry");
        let o = self.offset(i, j, k);
        self.data[o] = value;
    }

    pub fn frob_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_norm_sq().sqrt()
    }

    pub fn inner(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.dims, other.dims, "inner product of tensors with different dims");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn add_assign(&mut self, other: &Tensor3) {
        assert_eq!(self.dims, other.dims);
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
    }

    pub fn sub(&self, other: &Tensor3) -> Tensor3 {
        assert_eq!(self.dims, other.dims);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Tensor3 { dims: self.dims, data }
    }

    /// `self += d · u∘v∘w`.
    pub fn add_outer(&mut self, d: f64, u: &[f64], v: &[f64], w: &[f64]) {
        let [n, p, q] = self.dims;
        assert!(u.len() == n && v.len() == p && w.len() == q, "outer product dims");
        if d == 0.0 {
            return;
        }
        for k in 0..q {
            for j in 0..p {
                let c = d * v[j] * w[k];
                if c == 0.0 {
                    continue;
                }
                let base = n * (j + p * k);
                for (x, ui) in self.data[base..base + n].iter_mut().zip(u) {
                    *x += c * ui;
                }
            }
        }
    }

    /// Contracts the two modes other than `free`: `a` against the lower
    /// remaining mode and `b` against the higher one. For `free = One`
    /// this is `x ×₂ a ×₃ b`.
    pub fn contract_pair(&self, free: Mode, a: &[f64], b: &[f64]) -> Vector {
        let [n, p, q] = self.dims;
        let x = &self.data;
        match free {
            Mode::One => {
                assert!(a.len() == p && b.len() == q, "contraction dims");
                let mut out = vec![0.0; n];
                for k in 0..q {
                    if b[k] == 0.0 {
                        continue;
                    }
                    for j in 0..p {
                        let c = a[j] * b[k];
                        if c == 0.0 {
                            continue;
                        }
                        let base = n * (j + p * k);
                        for (o, xv) in out.iter_mut().zip(&x[base..base + n]) {
                            *o += c * xv;
                        }
                    }
                }
                Vector::from_vec(out)
            }
            Mode::Two => {
                assert!(a.len() == n && b.len() == q, "contraction dims");
                let mut out = vec![0.0; p];
                for k in 0..q {
                    if b[k] == 0.0 {
                        continue;
                    }
                    for (j, o) in out.iter_mut().enumerate() {
                        let base = n * (j + p * k);
                        let s: f64 = x[base..base + n].iter().zip(a).map(|(xv, av)| xv * av).sum();
                        *o += b[k] * s;
                    }
                }
                Vector::from_vec(out)
            }
            Mode::Three => {
                assert!(a.len() == n && b.len() == p, "contraction dims");
                let mut out = vec![0.0; q];
                for (k, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for j in 0..p {
                        if b[j] == 0.0 {
                            continue;
                        }
                        let base = n * (j + p * k);
                        let s: f64 = x[base..base + n].iter().zip(a).map(|(xv, av)| xv * av).sum();
                        acc += b[j] * s;
                    }
                    *o = acc;
                }
                Vector::from_vec(out)
            }
        }
    }

    /// Contraction of a factor triple `[u, v, w]` leaving `free` open.
    pub fn contract_except(&self, free: Mode, factors: &[Vector; 3]) -> Vector {
        let (a, b) = free.others();
        self.contract_pair(free, factors[a.index()].as_slice(), factors[b.index()].as_slice())
    }

    /// `x ×₁ u ×₂ v ×₃ w`.
    pub fn contract_all(&self, u: &[f64], v: &[f64], w: &[f64]) -> f64 {
        let c = self.contract_pair(Mode::One, v, w);
        c.as_slice().iter().zip(u).map(|(a, b)| a * b).sum()
    }
}

/// Unfolds `x` along `mode` using the fixed fiber ordering described in the
/// module docs.
pub fn matricize(x: &Tensor3, mode: Mode) -> Matrix {
    let [n, p, q] = x.dims;
    match mode {
        Mode::One => Matrix::from_column_slice(n, p * q, &x.data),
        Mode::Two => Matrix::from_fn(p, n * q, |j, col| {
            let (i, k) = (col % n, col / n);
            x.get(i, j, k)
        }),
        Mode::Three => Matrix::from_fn(q, n * p, |k, col| {
            let (i, j) = (col % n, col / n);
            x.get(i, j, k)
        }),
    }
}

/// Inverse of [`matricize`].
pub fn fold(m: &Matrix, mode: Mode, dims: [usize; 3]) -> Result<Tensor3> {
    let [n, p, q] = dims;
    let expected = match mode {
        Mode::One => (n, p * q),
        Mode::Two => (p, n * q),
        Mode::Three => (q, n * p),
    };
    if m.shape() != expected {
        return Err(HopcaError::dim(format!(
            "cannot fold a {:?} matrix along mode {mode} into {dims:?} (expected {expected:?})",
            m.shape()
        )));
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(HopcaError::dim("dimensions must be positive"));
    }
    let data = match mode {
        Mode::One => m.as_slice().to_vec(),
        Mode::Two => {
            let mut data = vec![0.0; n * p * q];
            for k in 0..q {
                for j in 0..p {
                    for i in 0..n {
                        data[i + n * (j + p * k)] = m[(j, i + n * k)];
                    }
                }
            }
            data
        }
        Mode::Three => {
            let mut data = vec![0.0; n * p * q];
            for k in 0..q {
                for j in 0..p {
                    for i in 0..n {
                        data[i + n * (j + p * k)] = m[(k, i + n * j)];
                    }
                }
            }
            data
        }
    };
    Tensor3::new(dims, data)
}

/// Mode-n product `x ×ₘ m`; the result replaces `dims[mode]` by `m.nrows()`.
pub fn mode_mult(x: &Tensor3, m: &Matrix, mode: Mode) -> Result<Tensor3> {
    let d = x.dim(mode);
    if m.ncols() != d {
        return Err(HopcaError::dim(format!(
            "mode-{mode} product needs {d} columns, matrix has {}",
            m.ncols()
        )));
    }
    let mut dims = x.dims;
    dims[mode.index()] = m.nrows();
    if m.nrows() == 0 {
        return Err(HopcaError::dim("mode product with an empty matrix"));
    }
    let product = m * matricize(x, mode);
    fold(&product, mode, dims)
}

/// Contracts a single mode with `v`, returning the order-2 remainder. The
/// rows index the lower remaining mode and the columns the higher one.
pub fn contract_vec(x: &Tensor3, v: &[f64], mode: Mode) -> Result<Matrix> {
    let d = x.dim(mode);
    if v.len() != d {
        return Err(HopcaError::dim(format!(
            "mode-{mode} contraction needs a length-{d} vector, got {}",
            v.len()
        )));
    }
    let [n, p, q] = x.dims;
    let out = match mode {
        Mode::One => Matrix::from_fn(p, q, |j, k| {
            let base = n * (j + p * k);
            x.data[base..base + n].iter().zip(v).map(|(a, b)| a * b).sum()
        }),
        Mode::Two => Matrix::from_fn(n, q, |i, k| (0..p).map(|j| x.get(i, j, k) * v[j]).sum()),
        Mode::Three => Matrix::from_fn(n, p, |i, j| (0..q).map(|k| x.get(i, j, k) * v[k]).sum()),
    };
    Ok(out)
}

/// Column-wise Kronecker product: column `k` is `a[:, k] ⊗ b[:, k]`.
pub fn khatri_rao(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.ncols() != b.ncols() {
        return Err(HopcaError::dim(format!(
            "Khatri-Rao product needs equal column counts, got {} and {}",
            a.ncols(),
            b.ncols()
        )));
    }
    let br = b.nrows();
    Ok(Matrix::from_fn(a.nrows() * br, a.ncols(), |r, c| a[(r / br, c)] * b[(r % br, c)]))
}

/// Rank-one tensor `d · u∘v∘w`.
pub fn outer3(u: &[f64], v: &[f64], w: &[f64], d: f64) -> Tensor3 {
    let mut t = Tensor3::zeros([u.len(), v.len(), w.len()]);
    t.add_outer(d, u, v, w);
    t
}

pub fn frob_norm(x: &Tensor3) -> f64 {
    x.frob_norm()
}

/// Three-way quadratic norm `sqrt(Σ x̃ᵢⱼₖ xᵢⱼₖ)` with `x̃ = x ×₁ q1 ×₂ q2 ×₃ q3`.
pub fn qnorm3(x: &Tensor3, q1: &Matrix, q2: &Matrix, q3: &Matrix) -> Result<f64> {
    let [n, p, q] = x.dims;
    for (name, m, d) in [("q1", q1, n), ("q2", q2, p), ("q3", q3, q)] {
        if m.shape() != (d, d) {
            return Err(HopcaError::dim(format!("{name} must be {d}×{d}, got {:?}", m.shape())));
        }
    }
    let weighted = mode_mult(&mode_mult(&mode_mult(x, q1, Mode::One)?, q2, Mode::Two)?, q3, Mode::Three)?;
    let inner = weighted.inner(x);
    let scale = x.frob_norm_sq() * q1.norm() * q2.norm() * q3.norm();
    if inner < -1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(HopcaError::arg(format!(
            "quadratic norm is negative ({inner:e}); operators are not positive semi-definite"
        )));
    }
    Ok(inner.max(0.0).sqrt())
}
