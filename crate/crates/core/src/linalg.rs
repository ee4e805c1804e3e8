//! Small dense linear-algebra helpers built on nalgebra's symmetric
//! eigensolver.

use nalgebra::SymmetricEigen;

use crate::error::{HopcaError, Result};
use crate::tensor::{Matrix, Vector};

/// Eigen-floor used by pseudo-inverses and matrix functions.
pub const EIG_FLOOR: f64 = 1e-12;

/// Symmetric eigendecomposition with eigenvalues sorted descending. Ties keep
/// the solver's original column order.
pub fn sym_eigen_desc(m: &Matrix) -> (Vec<f64>, Matrix) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = Matrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Leading `k` left singular vectors of `m`, computed from whichever Gram
/// matrix is smaller.
#[derive(Clone, Debug)]
pub struct LeadingSingular {
    pub vectors: Matrix,
    pub values: Vec<f64>,
    /// `σ_k − σ_{k+1}` when a `(k+1)`-th singular value exists.
    pub gap: Option<f64>,
}

pub fn leading_left_singular(m: &Matrix, k: usize) -> LeadingSingular {
    let (rows, cols) = m.shape();
    assert!(k <= rows, "requested {k} singular vectors of a {rows}-row matrix");
    if rows <= cols {
        let gram = m * m.transpose();
        let (vals, vecs) = sym_eigen_desc(&gram);
        let sv: Vec<f64> = vals.iter().map(|v| v.max(0.0).sqrt()).collect();
        let gap = (k < sv.len()).then(|| sv[k - 1] - sv[k]).filter(|_| k > 0);
        LeadingSingular { vectors: vecs.columns(0, k).into_owned(), values: sv[..k].to_vec(), gap }
    } else {
        let gram = m.transpose() * m;
        let (vals, vecs) = sym_eigen_desc(&gram);
        let sv: Vec<f64> = vals.iter().map(|v| v.max(0.0).sqrt()).collect();
        let mut basis: Vec<Vector> = Vec::with_capacity(k);
        let mut values = Vec::with_capacity(k);
        let scale = sv.first().copied().unwrap_or(0.0);
        for c in 0..k.min(cols) {
            if sv[c] <= 1e-10 * scale || sv[c] == 0.0 {
                break;
            }
            let u = (m * vecs.column(c)) / sv[c];
            if let Some(u) = orthogonalize_against(&u, &basis) {
                basis.push(u);
                values.push(sv[c]);
            }
        }
        complete_basis(&mut basis, rows, k);
        values.resize(k, 0.0);
        let gap = if k > 0 && k < cols { Some(values[k - 1] - sv[k]) } else { None };
        let vectors = Matrix::from_columns(&basis);
        LeadingSingular { vectors, values, gap }
    }
}

/// Gram-Schmidt step; returns `None` if `v` lies (numerically) in the span.
pub fn orthogonalize_against(v: &Vector, basis: &[Vector]) -> Option<Vector> {
    let mut r = v.clone();
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&r);
            r.axpy(-c, b, 1.0);
        }
    }
    let n = r.norm();
    (n > 1e-10 * v.norm().max(f64::MIN_POSITIVE)).then(|| r / n)
}

/// Extends an orthonormal set to `k` vectors using standard basis directions.
pub fn complete_basis(basis: &mut Vec<Vector>, dim: usize, k: usize) {
    let mut e = 0;
    while basis.len() < k && e < dim {
        let mut cand = Vector::zeros(dim);
        cand[e] = 1.0;
        if let Some(u) = orthogonalize_against(&cand, basis) {
            basis.push(u);
        }
        e += 1;
    }
}

/// Applies `f` to the eigenvalues of a symmetric matrix (floored at
/// [`EIG_FLOOR`]) and reassembles.
pub fn sym_matrix_fn(s: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let eig = SymmetricEigen::new(s.clone());
    let vals = eig.eigenvalues.map(|l| f(l.max(EIG_FLOOR)));
    &eig.eigenvectors * Matrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
}

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix; eigenvalues at or
/// below `floor · λ_max` are treated as zero.
pub fn pinv_sym(g: &Matrix, floor: f64) -> (Matrix, bool) {
    let eig = SymmetricEigen::new(g.clone());
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut singular = false;
    let inv = eig.eigenvalues.map(|l| {
        if l > floor * top.max(f64::MIN_POSITIVE) && l > 0.0 {
            1.0 / l
        } else {
            singular = true;
            0.0
        }
    });
    (&eig.eigenvectors * Matrix::from_diagonal(&inv) * eig.eigenvectors.transpose(), singular)
}

/// Orthonormal basis for the column span of `a`, from the eigendecomposition
/// of its Gram matrix with the given relative floor.
pub fn column_span_basis(a: &Matrix, floor: f64) -> Matrix {
    if a.ncols() == 0 {
        return Matrix::zeros(a.nrows(), 0);
    }
    let gram = a.transpose() * a;
    let (vals, vecs) = sym_eigen_desc(&gram);
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    let cols: Vec<Vector> = vals
        .iter()
        .enumerate()
        .filter(|(_, &l)| top > 0.0 && l > floor * top)
        .map(|(c, &l)| (a * vecs.column(c)) / l.sqrt())
        .collect();
    if cols.is_empty() {
        Matrix::zeros(a.nrows(), 0)
    } else {
        Matrix::from_columns(&cols)
    }
}

pub fn min_eigenvalue(m: &Matrix) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
pub fn power_max_eigenvalue(q: &Matrix) -> f64 {
    let n = q.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = Vector::from_fn(n, |i, _| 1.0 + 0.01 * (i as f64 + 1.0).sqrt());
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let qv = q * &v;
        let next = v.dot(&qv);
        let nrm = qv.norm();
        if nrm == 0.0 {
            return 0.0;
        }
        v = qv / nrm;
        if (next - lambda).abs() <= 1e-13 * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // Rayleigh quotient can undershoot slightly; the norm bound keeps 1/L a safe step.
    lambda.max((q * &v).norm())
}

pub fn check_symmetric(name: &str, m: &Matrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(HopcaError::dim(format!("{name} must be square, got {:?}", m.shape())));
    }
    let scale = m.amax().max(1.0);
    for r in 0..m.nrows() {
        for c in 0..r {
            if (m[(r, c)] - m[(c, r)]).abs() > tol * scale {
                return Err(HopcaError::NotSymmetric(name.to_string()));
            }
        }
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(HopcaError::arg(format!("{name} has non-finite entries")));
    }
    Ok(())
}

/// Unit-norm copy, or `None` for the zero vector.
pub fn normalized(v: &Vector) -> Option<Vector> {
    let n = v.norm();
    (n > 0.0).then(|| v / n)
}

/// Sign making the largest-magnitude entry positive (first such entry on ties).
pub fn dominant_sign(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for &x in v {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    if best < 0.0 { -1.0 } else { 1.0 }
}
