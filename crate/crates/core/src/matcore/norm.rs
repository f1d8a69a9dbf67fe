use crate::error::{Error, Result};
use crate::matcore::Matrix;

pub const DEFAULT_LAYER_NORM_EPS: f64 = 1e-5;

/// Softmax applied independently to each row, with the row maximum
/// subtracted first so large scores do not overflow.
pub fn row_softmax(a: &Matrix) -> Result<Matrix> {
    if a.is_empty() {
        return Err(Error::dim("row_softmax of an empty matrix"));
    }
    let mut out = a.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    Ok(out)
}

/// Per-row normalization to zero mean and unit population variance, with no
/// learned gain or bias.
///
/// `epsilon` is added to the variance before the square root. Zero is
/// accepted; a constant row then maps to zeros instead of `0/0`.
pub fn layer_norm(a: &Matrix, epsilon: f64) -> Result<Matrix> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!(
            "layer_norm epsilon must be finite and non-negative, got {epsilon}"
        )));
    }
    if a.cols() == 0 {
        return Err(Error::dim("layer_norm needs at least one column"));
    }
    let n = a.cols() as f64;
    let mut out = a.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let mean = row.iter().sum::<f64>() / n;
        for v in row.iter_mut() {
            *v -= mean;
        }
        let var = row.iter().map(|v| v * v).sum::<f64>() / n;
        let denom = (var + epsilon).sqrt();
        if denom > 0.0 {
            for v in row.iter_mut() {
                *v /= denom;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn softmax_examples() {
        let out = row_softmax(&m(&[&[0.0, 0.0], &[0.0, 0.0]])).unwrap();
        assert_eq!(out, m(&[&[0.5, 0.5], &[0.5, 0.5]]));

        let out = row_softmax(&m(&[&[0.0, 3f64.ln()]])).unwrap();
        assert!((out[(0, 0)] - 0.25).abs() < 1e-15);
        assert!((out[(0, 1)] - 0.75).abs() < 1e-15);

        let out = row_softmax(&m(&[&[1000.0, 1000.0 + 2f64.ln()]])).unwrap();
        assert!((out[(0, 0)] - 1.0 / 3.0).abs() < 1e-12);
        assert!((out[(0, 1)] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_rejects_empty() {
        assert!(matches!(
            row_softmax(&Matrix::zeros(0, 3)),
            Err(Error::Dimension(_))
        ));
        assert!(row_softmax(&Matrix::zeros(2, 0)).is_err());
    }

    #[test]
    fn layer_norm_examples() {
        let out = layer_norm(&m(&[&[5.0, 5.0, 5.0]]), 1e-5).unwrap();
        assert_eq!(out, Matrix::zeros(1, 3));

        let out = layer_norm(&m(&[&[0.0, 2.0]]), 0.0).unwrap();
        assert_eq!(out, m(&[&[-1.0, 1.0]]));

        // mean 2, population variance 2/3
        let out = layer_norm(&m(&[&[1.0, 2.0, 3.0]]), 1e-5).unwrap();
        let s = (2.0f64 / 3.0 + 1e-5).sqrt();
        for (j, x) in [1.0, 2.0, 3.0].iter().enumerate() {
            assert!((out[(0, j)] - (x - 2.0) / s).abs() < 1e-14);
        }
        let row = out.row(0);
        assert!(row.iter().sum::<f64>().abs() < 1e-14);
        let var = row.iter().map(|v| v * v).sum::<f64>() / 3.0;
        assert!((var - 1.0).abs() < 1e-4);
    }

    #[test]
    fn layer_norm_rejects_negative_epsilon() {
        let a = m(&[&[1.0, 2.0]]);
        assert!(matches!(layer_norm(&a, -1e-5), Err(Error::Config(_))));
        assert!(matches!(layer_norm(&a, f64::NAN), Err(Error::Config(_))));
    }
}
