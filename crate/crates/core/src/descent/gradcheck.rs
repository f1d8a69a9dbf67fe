//! Central finite-difference check of the closed-form gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::descent::{euclidean_gradients, loss_terms, Gradients, LossConfig};
use crate::error::Result;
use crate::matcore::{qr_orthonormalize, Matrix};
use crate::pls::InnerRelation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    P,
    Q,
    D,
}

impl std::fmt::Display for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Block::P => "P",
            Block::Q => "Q",
            Block::D => "D",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckConfig {
    /// Finite-difference half-width.
    pub step: f64,
    pub tolerance: f64,
    pub configurations: usize,
    pub seed: u64,
    /// Fixed penalty weights; when unset, configurations cycle through
    /// `{0, 0.5, 10}` for each.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            step: 1e-5,
            tolerance: 1e-4,
            configurations: 20,
            seed: 42,
            alpha: None,
            beta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_block: Block,
    pub worst_configuration: usize,
    pub configurations: usize,
    pub entries: usize,
    pub passed: bool,
}

/// `|a − b| / max(|a|, |b|, 1)`: relative for entries of magnitude above one,
/// absolute below.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// One random problem instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub x: Matrix,
    pub y: Matrix,
    pub p: Matrix,
    pub q: Matrix,
    pub d: InnerRelation,
    pub loss: LossConfig,
}

const WEIGHTS: [f64; 3] = [0.0, 0.5, 10.0];

/// The `index`-th instance of the suite: varying sizes, penalty weights and
/// both inner-relation modes.
pub fn instance(cfg: &GradCheckConfig, index: usize) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(index as u64));
    let n = rng.random_range(4..=12);
    let m = rng.random_range(1..=6);
    let p_dim = rng.random_range(1..=4);
    let l = rng.random_range(1..=m.min(p_dim));
    let x = Matrix::random_normal(n, m, &mut rng);
    let y = Matrix::random_normal(n, p_dim, &mut rng);
    let p = qr_orthonormalize(&Matrix::random_normal(m, l, &mut rng))?;
    let q = qr_orthonormalize(&Matrix::random_normal(p_dim, l, &mut rng))?;
    let d = if index % 2 == 0 {
        InnerRelation::Diagonal(Matrix::random_normal(1, l, &mut rng).into_vec())
    } else {
        InnerRelation::General(Matrix::random_normal(l, l, &mut rng))
    };
    let loss = LossConfig::new(
        cfg.alpha.unwrap_or(WEIGHTS[index % 3]),
        cfg.beta.unwrap_or(WEIGHTS[(index / 3) % 3]),
    )?;
    Ok(Instance { x, y, p, q, d, loss })
}

/// Central differences of the loss, taken term by term so that a large
/// penalty that does not depend on the perturbed block cancels exactly.
///
/// Uses the five-point stencil
/// `[f(−2h) − 8f(−h) + 8f(h) − f(2h)] / 12h`, whose truncation error involves
/// the fifth derivative. Each loss term is a polynomial of degree at most
/// four in any one block, so only rounding error remains, even when the
/// penalty weights are large.
pub fn finite_difference_gradients(inst: &Instance, h: f64) -> Result<Gradients> {
    let Instance { x, y, p, q, d, loss } = inst;
    // `at(s)` returns the parameters with one entry shifted by `s`
    let diff = |at: &dyn Fn(f64) -> (Matrix, Matrix, InnerRelation)| -> Result<f64> {
        let mut terms = [[0.0; 3]; 4];
        for (slot, s) in terms.iter_mut().zip([-2.0 * h, -h, h, 2.0 * h]) {
            let (pp, qq, dd) = at(s);
            let t = loss_terms(x, y, &pp, &qq, &dd)?;
            *slot = [t.regression, t.x_reconstruction, t.y_reconstruction];
        }
        let stencil = |k: usize| {
            (terms[0][k] - 8.0 * terms[1][k] + 8.0 * terms[2][k] - terms[3][k]) / (12.0 * h)
        };
        let mut g = stencil(0);
        if loss.alpha != 0.0 {
            g += loss.alpha * stencil(1);
        }
        if loss.beta != 0.0 {
            g += loss.beta * stencil(2);
        }
        Ok(g)
    };

    let bump = |m: &Matrix, i: usize, j: usize, s: f64| {
        let mut out = m.clone();
        out[(i, j)] += s;
        out
    };

    let mut g_p = Matrix::zeros(p.rows(), p.cols());
    for i in 0..p.rows() {
        for j in 0..p.cols() {
            g_p[(i, j)] = diff(&|s| (bump(p, i, j, s), q.clone(), d.clone()))?;
        }
    }
    let mut g_q = Matrix::zeros(q.rows(), q.cols());
    for i in 0..q.rows() {
        for j in 0..q.cols() {
            g_q[(i, j)] = diff(&|s| (p.clone(), bump(q, i, j, s), d.clone()))?;
        }
    }
    let g_d = match d {
        InnerRelation::Diagonal(v) => {
            let mut out = vec![0.0; v.len()];
            for (k, o) in out.iter_mut().enumerate() {
                *o = diff(&|s| {
                    let mut shifted = v.clone();
                    shifted[k] += s;
                    (p.clone(), q.clone(), InnerRelation::Diagonal(shifted))
                })?;
            }
            InnerRelation::Diagonal(out)
        }
        InnerRelation::General(m) => {
            let mut out = Matrix::zeros(m.rows(), m.cols());
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    out[(i, j)] =
                        diff(&|s| (p.clone(), q.clone(), InnerRelation::General(bump(m, i, j, s))))?;
                }
            }
            InnerRelation::General(out)
        }
    };
    Ok(Gradients {
        p: g_p,
        q: g_q,
        d: g_d,
    })
}

/// Largest entrywise relative error between two gradient sets and the block
/// where it occurs.
pub fn compare(analytic: &Gradients, numeric: &Gradients) -> (f64, Block) {
    let blocks = [
        (Block::P, analytic.p.as_slice(), numeric.p.as_slice()),
        (Block::Q, analytic.q.as_slice(), numeric.q.as_slice()),
        (Block::D, analytic.d.params(), numeric.d.params()),
    ];
    let mut worst = (0.0, Block::P);
    for (block, a, b) in blocks {
        if a.len() != b.len() {
            return (f64::INFINITY, block);
        }
        for (&u, &v) in a.iter().zip(b) {
            let e = relative_error(u, v);
            if !(e <= worst.0) {
                worst = (e, block);
            }
        }
    }
    worst
}

/// Signature of a gradient routine under test.
pub type GradientFn =
    dyn Fn(&Matrix, &Matrix, &Matrix, &Matrix, &InnerRelation, &LossConfig) -> Result<Gradients>;

/// Runs the suite against [`euclidean_gradients`].
pub fn run_gradcheck(cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    run_gradcheck_with(cfg, &euclidean_gradients)
}

/// Runs the suite against an arbitrary gradient routine.
pub fn run_gradcheck_with(cfg: &GradCheckConfig, gradient: &GradientFn) -> Result<GradCheckReport> {
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_block: Block::P,
        worst_configuration: 0,
        configurations: cfg.configurations,
        entries: 0,
        passed: true,
    };
    for index in 0..cfg.configurations {
        let inst = instance(cfg, index)?;
        let analytic = gradient(&inst.x, &inst.y, &inst.p, &inst.q, &inst.d, &inst.loss)?;
        let numeric = finite_difference_gradients(&inst, cfg.step)?;
        let (err, block) = compare(&analytic, &numeric);
        report.entries += numeric.p.as_slice().len() + numeric.q.as_slice().len() + numeric.d.params().len();
        log::debug!(
            "config {index}: d_mode {}, alpha {}, beta {}, max rel err {err:e} ({block})",
            inst.d.mode().as_str(),
            inst.loss.alpha,
            inst.loss.beta
        );
        if !(err <= report.max_rel_error) {
            report.max_rel_error = err;
            report.worst_block = block;
            report.worst_configuration = index;
        }
    }
    report.passed = report.max_rel_error <= cfg.tolerance;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let report = run_gradcheck(&GradCheckConfig::default()).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn large_penalties_pass() {
        let cfg = GradCheckConfig {
            alpha: Some(1e6),
            beta: Some(1e6),
            ..Default::default()
        };
        let report = run_gradcheck(&cfg).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn corrupted_gradient_is_caught() {
        let corrupt = |x: &Matrix, y: &Matrix, p: &Matrix, q: &Matrix, d: &InnerRelation, c: &LossConfig| {
            let mut g = euclidean_gradients(x, y, p, q, d, c)?;
            g.q[(0, 0)] += 0.5;
            Ok(g)
        };
        let report = run_gradcheck_with(&GradCheckConfig::default(), &corrupt).unwrap();
        assert!(!report.passed);
        assert_eq!(report.worst_block, Block::Q);
    }
}
