use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matcore::{dot, Matrix};

/// Outcome of comparing the squared-error and inner-product criteria over a
/// candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// Candidate minimizing `‖Xw − y‖²`.
    pub argmin_sq_error: usize,
    /// Candidate maximizing `(Xw)·y`.
    pub argmax_inner: usize,
    pub agree: bool,
    pub candidates: usize,
}

fn response_column(y: &Matrix) -> Result<Vec<f64>> {
    if y.cols() != 1 {
        return Err(Error::dim(format!(
            "equivalence check needs a single response column, got {}",
            y.cols()
        )));
    }
    Ok(y.col(0))
}

/// Scores every candidate `w` after rescaling it so that `‖Xw‖ = 1`, which
/// makes `‖Xw − y‖² = 1 − 2(Xw)·y + ‖y‖²` and ties the two criteria together.
pub fn mse_equivalence_over(x: &Matrix, y: &Matrix, candidates: &[Vec<f64>]) -> Result<EquivalenceReport> {
    let y = response_column(y)?;
    if x.rows() != y.len() {
        return Err(Error::dim(format!(
            "X has {} rows, y has {}",
            x.rows(),
            y.len()
        )));
    }
    if x.max_abs() == 0.0 {
        return Err(Error::Degenerate("X is identically zero".into()));
    }
    if candidates.is_empty() {
        return Err(Error::Config("no candidates to compare".into()));
    }

    let mut best_sq = (0, f64::INFINITY);
    let mut best_inner = (0, f64::NEG_INFINITY);
    for (idx, w) in candidates.iter().enumerate() {
        if w.len() != x.cols() {
            return Err(Error::dim(format!(
                "candidate {idx} has {} entries, X has {} columns",
                w.len(),
                x.cols()
            )));
        }
        let mut score: Vec<f64> = x.row_iter().map(|r| dot(r, w)).collect();
        let norm = dot(&score, &score).sqrt();
        if norm == 0.0 {
            return Err(Error::Degenerate(format!(
                "candidate {idx} lies in the null space of X"
            )));
        }
        score.iter_mut().for_each(|s| *s /= norm);

        let sq_err: f64 = score.iter().zip(&y).map(|(s, t)| (s - t) * (s - t)).sum();
        let inner = dot(&score, &y);
        if sq_err < best_sq.1 {
            best_sq = (idx, sq_err);
        }
        if inner > best_inner.1 {
            best_inner = (idx, inner);
        }
    }
    Ok(EquivalenceReport {
        argmin_sq_error: best_sq.0,
        argmax_inner: best_inner.0,
        agree: best_sq.0 == best_inner.0,
        candidates: candidates.len(),
    })
}

/// [`mse_equivalence_over`] with `trials` Gaussian candidates drawn from a
/// seeded generator.
pub fn mse_equivalence_check(x: &Matrix, y: &Matrix, trials: usize, seed: u64) -> Result<EquivalenceReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<Vec<f64>> = (0..trials)
        .map(|_| (0..x.cols()).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    mse_equivalence_over(x, y, &candidates)
}
