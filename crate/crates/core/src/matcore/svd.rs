use crate::error::{Error, Result};
use crate::matcore::{dot, norm, Matrix};

/// Convergence threshold on the change of the iterate between sweeps.
pub const SVD_TOL: f64 = 1e-12;
pub const SVD_MAX_ITERS: usize = 10_000;

/// Singular values below this fraction of `‖A‖_F` are treated as exact zeros.
const SIGMA_ZERO_REL: f64 = 1e-13;

/// Leading singular triplets of a matrix.
///
/// `u` and `v` hold the left and right singular vectors as columns, matched
/// by position with `sigmas` (descending). `degenerate` is set when at least
/// one returned singular value is zero, in which case the corresponding
/// vectors are an arbitrary orthonormal completion.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriplets {
    pub sigmas: Vec<f64>,
    pub u: Matrix,
    pub v: Matrix,
    pub degenerate: bool,
}

impl SingularTriplets {
    /// `U diag(σ) Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        self.u.scale_cols(&self.sigmas).dot_t(&self.v)
    }
}

/// Deterministic, generic starting direction. Entries follow a low-discrepancy
/// sequence so the start is not orthogonal to structured singular vectors such
/// as `(1, -1)/√2`.
fn start_vector(m: usize) -> Vec<f64> {
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    let v: Vec<f64> = (0..m)
        .map(|i| 1.0 + 0.5 * ((i + 1) as f64 * GOLDEN).fract())
        .collect();
    let n = norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

/// Removes the components of `w` along each vector in `basis` (two passes of
/// Gram–Schmidt) and returns the remaining norm.
fn project_out(w: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(w, b);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
    }
    norm(w)
}

/// Unit vector orthogonal to `basis`, built from the standard basis.
fn completion(dim: usize, basis: &[Vec<f64>]) -> Vec<f64> {
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        let r = project_out(&mut e, basis);
        if r > 0.5 {
            return e.into_iter().map(|x| x / r).collect();
        }
    }
    unreachable!("completion requested for a full basis")
}

/// Leading `l` singular triplets of `a`, by power iteration on `AᵀA` with
/// deflation: each new right vector is iterated in the orthogonal complement
/// of the ones already found.
///
/// Each right vector is signed so its largest-magnitude entry is positive.
pub fn top_singular_triplets(a: &Matrix, l: usize) -> Result<SingularTriplets> {
    let (n, m) = a.shape();
    if l > n.min(m) {
        return Err(Error::dim(format!(
            "requested {l} singular triplets of a {n}x{m} matrix"
        )));
    }
    let frob = a.frobenius();
    let gram = a.t_dot(a);

    let mut sigmas = Vec::with_capacity(l);
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(l);
    let mut us: Vec<Vec<f64>> = Vec::with_capacity(l);
    let mut degenerate = false;

    for _ in 0..l {
        let mut v = start_vector(m);
        if project_out(&mut v, &vs) < 1e-8 {
            v = completion(m, &vs);
        } else {
            let r = norm(&v);
            v.iter_mut().for_each(|x| *x /= r);
        }

        for _ in 0..SVD_MAX_ITERS {
            let mut w: Vec<f64> = (0..m).map(|i| dot(gram.row(i), &v)).collect();
            let w_norm = project_out(&mut w, &vs);
            if w_norm == 0.0 || !w_norm.is_finite() {
                break;
            }
            w.iter_mut().for_each(|x| *x /= w_norm);
            let change = w
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            v = w;
            if change <= SVD_TOL {
                break;
            }
        }
        // final re-orthogonalization keeps V orthonormal to rounding
        let r = project_out(&mut v, &vs);
        v.iter_mut().for_each(|x| *x /= r);

        let mut u: Vec<f64> = (0..n).map(|i| dot(a.row(i), &v)).collect();
        let sigma = norm(&u);
        if frob == 0.0 || sigma <= SIGMA_ZERO_REL * frob {
            degenerate = true;
            sigmas.push(0.0);
            u = completion(n, &us);
        } else {
            sigmas.push(sigma);
            let r = project_out(&mut u, &us);
            u.iter_mut().for_each(|x| *x /= r);
        }

        let lead = v
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, x)| {
                if x.abs() > bv {
                    (i, x.abs())
                } else {
                    (bi, bv)
                }
            })
            .0;
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
            u.iter_mut().for_each(|x| *x = -*x);
        }
        vs.push(v);
        us.push(u);
    }

    // near-ties can leave neighbours marginally out of order
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&i, &j| sigmas[j].total_cmp(&sigmas[i]));

    let mut u_mat = Matrix::zeros(n, l);
    let mut v_mat = Matrix::zeros(m, l);
    let mut sorted = Vec::with_capacity(l);
    for (k, &src) in order.iter().enumerate() {
        u_mat.set_col(k, &us[src]);
        v_mat.set_col(k, &vs[src]);
        sorted.push(sigmas[src]);
    }
    Ok(SingularTriplets {
        sigmas: sorted,
        u: u_mat,
        v: v_mat,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let a = Matrix::from_diag(&[3.0, 1.0]);
        let t = top_singular_triplets(&a, 1).unwrap();
        assert!((t.sigmas[0] - 3.0).abs() < 1e-12);
        assert!(t.u.max_abs_diff(&Matrix::col_vector(&[1.0, 0.0])) < 1e-9);
        assert!(t.v.max_abs_diff(&Matrix::col_vector(&[1.0, 0.0])) < 1e-9);
        assert!(!t.degenerate);
    }

    #[test]
    fn repeated_singular_value_reconstructs() {
        let a = Matrix::from_diag(&[2.0, 2.0]);
        let t = top_singular_triplets(&a, 2).unwrap();
        assert!((t.sigmas[0] - 2.0).abs() < 1e-12 && (t.sigmas[1] - 2.0).abs() < 1e-12);
        assert!(t.reconstruct().sub(&a).frobenius() <= 1e-9);
        assert!(t.u.orthonormality_error() < 1e-10);
        assert!(t.v.orthonormality_error() < 1e-10);
    }

    #[test]
    fn zero_matrix_is_flagged() {
        let t = top_singular_triplets(&Matrix::zeros(3, 2), 2).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.sigmas, vec![0.0, 0.0]);
        assert!(t.u.orthonormality_error() < 1e-12);
        assert!(t.v.orthonormality_error() < 1e-12);
    }

    #[test]
    fn rank_one_completion() {
        let a = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]).unwrap();
        let t = top_singular_triplets(&a, 2).unwrap();
        assert!((t.sigmas[0] - 6f64.sqrt()).abs() < 1e-12);
        assert_eq!(t.sigmas[1], 0.0);
        assert!(t.degenerate);
        assert!(t.u.orthonormality_error() < 1e-10);
        assert!(t.v.orthonormality_error() < 1e-10);
        assert!(t.reconstruct().sub(&a).frobenius() < 1e-12);
    }

    #[test]
    fn antisymmetric_singular_vector_is_found() {
        // top right vector is (1, -1)/√2, orthogonal to all-ones
        let a = Matrix::from_rows(&[[2.0, -2.0], [0.5, 0.5]]).unwrap();
        let t = top_singular_triplets(&a, 1).unwrap();
        assert!((t.sigmas[0] - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn too_many_components() {
        assert!(matches!(
            top_singular_triplets(&Matrix::identity(2), 3),
            Err(Error::Dimension(_))
        ));
    }
}
