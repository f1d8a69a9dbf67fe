use crate::error::{Error, Result};
use crate::matcore::Matrix;

/// Relative threshold on `|R_kk| / max column norm` below which the input is
/// treated as rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// Orthonormal Q-factor of a thin QR decomposition, computed with Householder
/// reflections.
///
/// Signs are normalized so that the implied R-factor has a non-negative
/// diagonal; Q therefore spans the same nested column spaces as the input
/// with positively oriented columns, and an input that already has
/// orthonormal columns comes back unchanged up to rounding.
pub fn qr_orthonormalize(a: &Matrix) -> Result<Matrix> {
    let (n, k) = a.shape();
    if n < k {
        return Err(Error::dim(format!(
            "qr_orthonormalize needs rows >= cols, got {n}x{k}"
        )));
    }
    let scale = (0..k)
        .map(|j| a.col(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if k > 0 && scale == 0.0 {
        return Err(Error::Degenerate("qr_orthonormalize of a zero matrix".into()));
    }

    let mut r = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r_diag = Vec::with_capacity(k);

    for j in 0..k {
        let x: Vec<f64> = (j..n).map(|i| r[(i, j)]).collect();
        let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if x_norm <= RANK_TOL * scale {
            return Err(Error::Degenerate(format!(
                "qr_orthonormalize: column {j} is linearly dependent on the preceding columns"
            )));
        }
        let alpha = if x[0] >= 0.0 { -x_norm } else { x_norm };
        let mut v = x;
        v[0] -= alpha;
        let v_norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        for t in v.iter_mut() {
            *t /= v_norm;
        }
        // apply H = I - 2vvᵀ to the trailing block
        for c in j..k {
            let proj: f64 = (j..n).map(|i| v[i - j] * r[(i, c)]).sum();
            for i in j..n {
                r[(i, c)] -= 2.0 * v[i - j] * proj;
            }
        }
        r_diag.push(alpha);
        reflectors.push(v);
    }

    // Q = H_0 H_1 ... H_{k-1} applied to the first k columns of the identity
    let mut q = Matrix::eye(n, k);
    for (j, v) in reflectors.iter().enumerate().rev() {
        for c in 0..k {
            let proj: f64 = (j..n).map(|i| v[i - j] * q[(i, c)]).sum();
            for i in j..n {
                q[(i, c)] -= 2.0 * v[i - j] * proj;
            }
        }
    }
    for (j, &d) in r_diag.iter().enumerate() {
        if d < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Ok(q)
}
