//! Independent oracles and data generators shared by the integration tests.
//! Nothing here calls the implementation paths it is used to check.
#![allow(dead_code)]

use plsattn::matcore::Matrix;
use plsattn::pls::InnerRelation;
use plsattn::descent::LossConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::new(rows, cols, data).unwrap()
}

/// Textbook triple loop.
pub fn naive_matmul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.cols(), b.rows());
    let mut out = vec![0.0; a.rows() * b.cols()];
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut s = 0.0;
            for k in 0..a.cols() {
                s += a[(i, k)] * b[(k, j)];
            }
            out[i * b.cols() + j] = s;
        }
    }
    Matrix::new(a.rows(), b.cols(), out).unwrap()
}

pub fn naive_transpose(a: &Matrix) -> Matrix {
    let mut out = vec![0.0; a.rows() * a.cols()];
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out[j * a.rows() + i] = a[(i, j)];
        }
    }
    Matrix::new(a.cols(), a.rows(), out).unwrap()
}

/// Classical Gram–Schmidt on the columns; positive diagonal by construction.
pub fn gram_schmidt(a: &Matrix) -> Matrix {
    let (n, k) = a.shape();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..k {
        let orig: Vec<f64> = (0..n).map(|i| a[(i, j)]).collect();
        let mut v = orig.clone();
        for c in &cols {
            let proj: f64 = c.iter().zip(&orig).map(|(x, y)| x * y).sum();
            for i in 0..n {
                v[i] -= proj * c[i];
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    Matrix::from_fn(n, k, |i, j| cols[j][i])
}

/// Random matrix with orthonormal columns (Gram–Schmidt of a Gaussian).
pub fn random_orthonormal(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let g = gaussian(n, k, rng);
    // twice for accuracy
    gram_schmidt(&gram_schmidt(&g))
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvalues are
/// returned in descending order with eigenvectors as matching columns.
pub fn jacobi_eigen(sym: &Matrix) -> (Vec<f64>, Matrix) {
    let n = sym.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| sym.row(i).to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let vals = order.iter().map(|&i| a[i][i]).collect();
    let vecs = Matrix::from_fn(n, n, |i, j| v[i][order[j]]);
    (vals, vecs)
}

/// One-sided Jacobi SVD. Returns singular values (descending) with left and
/// right singular vectors as columns, thin form with `min(n, m)` triplets.
pub fn jacobi_svd(a: &Matrix) -> (Vec<f64>, Matrix, Matrix) {
    let (n, m) = a.shape();
    if n < m {
        let (s, u, v) = jacobi_svd(&naive_transpose(a));
        return (s, v, u);
    }
    // columns of w get orthogonalized; v accumulates the rotations
    let mut w: Vec<Vec<f64>> = (0..m).map(|j| (0..n).map(|i| a[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..m)
        .map(|j| (0..m).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..200 {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let alpha: f64 = w[p].iter().map(|x| x * x).sum();
                let beta: f64 = w[q].iter().map(|x| x * x).sum();
                let gamma: f64 = w[p].iter().zip(&w[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    let (x, y) = (w[p][k], w[q][k]);
                    w[p][k] = c * x - s * y;
                    w[q][k] = s * x + c * y;
                }
                for k in 0..m {
                    let (x, y) = (v[p][k], v[q][k]);
                    v[p][k] = c * x - s * y;
                    v[q][k] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sig: Vec<f64> = w.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| sig[j].total_cmp(&sig[i]));
    let sigmas: Vec<f64> = order.iter().map(|&i| sig[i]).collect();
    let u = Matrix::from_fn(n, m, |i, j| {
        let c = order[j];
        if sig[c] > 0.0 { w[c][i] / sig[c] } else { 0.0 }
    });
    let vm = Matrix::from_fn(m, m, |i, j| v[order[j]][i]);
    (sigmas, u, vm)
}

/// Cell-by-cell evaluation of the loss with explicit sums.
pub fn naive_loss(x: &Matrix, y: &Matrix, p: &Matrix, q: &Matrix, d: &Matrix, cfg: &LossConfig) -> f64 {
    let xp = naive_matmul(x, p);
    let yq = naive_matmul(y, q);
    let pred = naive_matmul(&xp, d);
    let xr = naive_matmul(&xp, &naive_transpose(p));
    let yr = naive_matmul(&yq, &naive_transpose(q));
    let sq = |a: &Matrix, b: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let e = a[(i, j)] - b[(i, j)];
                s += e * e;
            }
        }
        s
    };
    0.5 * (sq(&pred, &yq) + cfg.alpha * sq(&xr, x) + cfg.beta * sq(&yr, y))
}

/// Whole-loss central differences over every free parameter.
pub fn central_difference(
    x: &Matrix,
    y: &Matrix,
    p: &Matrix,
    q: &Matrix,
    d: &InnerRelation,
    cfg: &LossConfig,
    h: f64,
) -> (Matrix, Matrix, Vec<f64>) {
    let f = |p: &Matrix, q: &Matrix, d: &Matrix| naive_loss(x, y, p, q, d, cfg);
    let dm = d.to_matrix();
    let bump = |m: &Matrix, i: usize, j: usize, s: f64| {
        let mut o = m.clone();
        o[(i, j)] += s;
        o
    };
    let gp = Matrix::from_fn(p.rows(), p.cols(), |i, j| {
        (f(&bump(p, i, j, h), q, &dm) - f(&bump(p, i, j, -h), q, &dm)) / (2.0 * h)
    });
    let gq = Matrix::from_fn(q.rows(), q.cols(), |i, j| {
        (f(p, &bump(q, i, j, h), &dm) - f(p, &bump(q, i, j, -h), &dm)) / (2.0 * h)
    });
    let gd = match d {
        InnerRelation::Diagonal(v) => (0..v.len())
            .map(|k| (f(p, q, &bump(&dm, k, k, h)) - f(p, q, &bump(&dm, k, k, -h))) / (2.0 * h))
            .collect(),
        InnerRelation::General(_) => {
            let l = dm.rows();
            let mut out = Vec::with_capacity(l * l);
            for i in 0..l {
                for j in 0..l {
                    out.push((f(p, q, &bump(&dm, i, j, h)) - f(p, q, &bump(&dm, i, j, -h))) / (2.0 * h));
                }
            }
            out
        }
    };
    (gp, gq, gd)
}

/// A noise-free planted model `Y = X P diag(D) Qᵀ`.
///
/// X is built as `U diag(s) Wᵀ` with `U` centered-orthonormal and `W`
/// orthogonal, and `P` is taken from the columns of `W`, so `XᵀX P = P S²`
/// and the singular values of `XᵀY` are `s_k² d_k`, distinct by construction.
pub struct Planted {
    pub x: Matrix,
    pub y: Matrix,
    pub p: Matrix,
    pub q: Matrix,
    pub d: Vec<f64>,
    /// Spans the column space of X when `rank < m`.
    pub x_basis: Matrix,
}

pub fn planted(seed: u64, n: usize, m: usize, p_dim: usize, l: usize, rank: usize) -> Planted {
    assert!(l <= rank && rank <= m && l <= p_dim && m < n);
    let mut rng = rng(seed);
    // centered orthonormal columns
    let g = gaussian(n, m, &mut rng);
    let means = g.col_means();
    let g = Matrix::from_fn(n, m, |i, j| g[(i, j)] - means[j]);
    let u = gram_schmidt(&gram_schmidt(&g));
    let w = random_orthonormal(m, m, &mut rng);
    let s: Vec<f64> = (0..m).map(|k| if k < rank { 3.0 - 0.35 * k as f64 } else { 0.0 }).collect();
    let us = Matrix::from_fn(n, m, |i, j| u[(i, j)] * s[j]);
    let x = naive_matmul(&us, &naive_transpose(&w));
    let p = w.leading_cols(l);
    let q = random_orthonormal(p_dim, l, &mut rng);
    let d: Vec<f64> = (0..l).map(|k| 2.0 - 0.3 * k as f64).collect();
    let pd = Matrix::from_fn(m, l, |i, j| p[(i, j)] * d[j]);
    let y = naive_matmul(&naive_matmul(&x, &pd), &naive_transpose(&q));
    Planted {
        x,
        y,
        p,
        q,
        d,
        x_basis: w.leading_cols(rank),
    }
}

/// Largest principal angle via the cosine route (independent of the
/// implementation's sine route).
pub fn max_angle(a: &Matrix, b: &Matrix) -> f64 {
    let (s, _, _) = jacobi_svd(&naive_matmul(&naive_transpose(a), b));
    let min_cos = s.iter().cloned().fold(f64::INFINITY, f64::min).min(1.0);
    min_cos.acos()
}
