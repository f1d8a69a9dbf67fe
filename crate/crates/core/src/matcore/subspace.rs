use crate::error::{Error, Result};
use crate::matcore::{top_singular_triplets, Matrix};

/// Principal angles (radians, ascending) between the column spans of two
/// matrices with orthonormal columns.
///
/// Angles come from the singular values of `B − A(AᵀB)`, which are the sines
/// of the angles; this stays accurate for nearly coincident subspaces where
/// the cosine route loses half the digits.
pub fn principal_angles(a: &Matrix, b: &Matrix) -> Result<Vec<f64>> {
    if a.shape() != b.shape() {
        return Err(Error::dim(format!(
            "principal angles need equal shapes, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let k = a.cols();
    let residual = b.sub(&a.dot(&a.t_dot(b)));
    let sines = top_singular_triplets(&residual, k)?.sigmas;
    Ok(sines.iter().rev().map(|s| s.min(1.0).asin()).collect())
}

/// Cosine of the largest principal angle: 1 when the spans coincide.
pub fn subspace_cosine(a: &Matrix, b: &Matrix) -> Result<f64> {
    let angles = principal_angles(a, b)?;
    Ok(angles.last().map_or(1.0, |t| t.cos()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_span_different_basis() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b = Matrix::from_rows(&[[s, s], [s, -s], [0.0, 0.0]]).unwrap();
        let angles = principal_angles(&a, &b).unwrap();
        assert!(angles.iter().all(|t| t.abs() < 1e-12));
        assert!((subspace_cosine(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn known_angle() {
        let t: f64 = 0.3;
        let a = Matrix::col_vector(&[1.0, 0.0]);
        let b = Matrix::col_vector(&[t.cos(), t.sin()]);
        let angles = principal_angles(&a, &b).unwrap();
        assert!((angles[0] - t).abs() < 1e-12);
        let c = Matrix::col_vector(&[1e-9f64.cos(), 1e-9f64.sin()]);
        assert!((principal_angles(&a, &c).unwrap()[0] - 1e-9).abs() < 1e-15);
    }
}
