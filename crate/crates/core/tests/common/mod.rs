#![allow(dead_code)]

use hopca::{Matrix, Tensor3, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

pub fn unit_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    let v = gaussian_vec(rng, n);
    let norm = v.norm();
    v / norm
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

pub fn gaussian_tensor(rng: &mut ChaCha8Rng, dims: [usize; 3]) -> Tensor3 {
    Tensor3::from_fn(dims, |_, _, _| StandardNormal.sample(rng))
}

/// `A Aᵀ / n + shift·I`.
pub fn random_pd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Matrix {
    let a = gaussian_matrix(rng, n, n);
    &a * a.transpose() / n as f64 + Matrix::identity(n, n) * shift
}

pub fn cosine(a: &Vector, b: &Vector) -> f64 {
    a.dot(b) / (a.norm() * b.norm())
}

pub fn max_abs_diff(a: &Vector, b: &Vector) -> f64 {
    (a - b).amax()
}

/// Unit vector with exactly the given support.
pub fn sparse_unit(rng: &mut ChaCha8Rng, n: usize, support: &[usize]) -> Vector {
    let mut v = Vector::zeros(n);
    for &i in support {
        let g: f64 = StandardNormal.sample(rng);
        v[i] = g.signum() * (0.5 + g.abs());
    }
    let norm = v.norm();
    v / norm
}

pub fn rank_one(d: f64, u: &Vector, v: &Vector, w: &Vector) -> Tensor3 {
    hopca::outer3(u.as_slice(), v.as_slice(), w.as_slice(), d)
}

/// Dense Kronecker-free projection oracle: `y = x ×₁P₁ ×₂P₂ ×₃P₃` by
/// explicit summation.
pub fn project_dense(x: &Tensor3, p: [&Matrix; 3]) -> Tensor3 {
    let [n, q, r] = x.dims();
    let mut a = Tensor3::zeros(x.dims());
    for i in 0..n {
        for j in 0..q {
            for k in 0..r {
                let mut s = 0.0;
                for ii in 0..n {
                    s += p[0][(i, ii)] * x.get(ii, j, k);
                }
                a.set(i, j, k, s);
            }
        }
    }
    let mut b = Tensor3::zeros(x.dims());
    for i in 0..n {
        for j in 0..q {
            for k in 0..r {
                let mut s = 0.0;
                for jj in 0..q {
                    s += p[1][(j, jj)] * a.get(i, jj, k);
                }
                b.set(i, j, k, s);
            }
        }
    }
    let mut c = Tensor3::zeros(x.dims());
    for i in 0..n {
        for j in 0..q {
            for k in 0..r {
                let mut s = 0.0;
                for kk in 0..r {
                    s += p[2][(k, kk)] * b.get(i, j, kk);
                }
                c.set(i, j, k, s);
            }
        }
    }
    c
}

/// `U (UᵀU)⁻¹ Uᵀ` through an explicit inverse.
pub fn projection_matrix(u: &Matrix) -> Matrix {
    let g = u.transpose() * u;
    u * g.try_inverse().expect("full column rank") * u.transpose()
}
